//! Mesh (loop) analysis of the driving-point impedance, independent of the
//! nodal formulation in the parent module.
//!
//! A unit-EMF, zero-impedance source branch is added between the probe and
//! ground. A spanning tree over the branch graph defines one fundamental
//! loop per co-tree branch; KVL around those loops gives
//! `(B Z B^T) I = B e`, and the input impedance follows from the current
//! through the source branch. Nothing here touches the admittance stamps,
//! so agreement between the two routes is a real consistency check.

use super::CircuitNetwork;
use crate::error::{Error, Result};
use crate::{c64, Mat};
use faer::prelude::Solve;
use std::collections::HashMap;

struct Branch {
    a: usize,
    b: usize,
    z: c64,
    emf: c64,
}

/// Driving-point impedance at the probe versus ground via loop analysis.
pub fn driving_point_impedance_mesh(net: &CircuitNetwork, omega: f64) -> Result<c64> {
    if !(omega > 0.0) {
        return Err(Error::Precondition(format!("omega must be > 0, got {omega}")));
    }
    let nodes = net.node_order();
    let index: HashMap<&str, usize> =
        nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let ground = index[net.ground.as_str()];
    let probe = index[net.probe.as_str()];

    let mut branches: Vec<Branch> = net
        .elements
        .iter()
        .map(|e| Branch {
            a: index[e.node_a.as_str()],
            b: index[e.node_b.as_str()],
            z: e.impedance(omega),
            emf: c64::new(0.0, 0.0),
        })
        .collect();
    let src = branches.len();
    branches.push(Branch { a: ground, b: probe, z: c64::new(0.0, 0.0), emf: c64::new(1.0, 0.0) });

    // Spanning tree by BFS from ground; parent[v] = (parent node, branch).
    let mut adj = vec![Vec::new(); nodes.len()];
    for (k, br) in branches.iter().enumerate() {
        adj[br.a].push((br.b, k));
        adj[br.b].push((br.a, k));
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes.len()];
    let mut depth = vec![usize::MAX; nodes.len()];
    let mut in_tree = vec![false; branches.len()];
    let mut queue = std::collections::VecDeque::from([ground]);
    depth[ground] = 0;
    while let Some(u) = queue.pop_front() {
        for &(v, k) in &adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = Some((u, k));
                in_tree[k] = true;
                queue.push_back(v);
            }
        }
    }

    // Sign of traversing branch k in the direction from -> to.
    let travel_sign = |k: usize, from: usize, to: usize| -> f64 {
        let br = &branches[k];
        if br.a == from && br.b == to {
            1.0
        } else {
            debug_assert!(br.a == to && br.b == from);
            -1.0
        }
    };

    // Fundamental loop of each co-tree branch: the link traversed a -> b,
    // then the tree path b -> lca -> a.
    let links: Vec<usize> = (0..branches.len()).filter(|&k| !in_tree[k]).collect();
    let n_loops = links.len();
    if n_loops == 0 {
        // a tree network carries no current anywhere; the probe is open
        return Err(Error::SingularSystem { omega });
    }
    let mut b_rows: Vec<Vec<f64>> = vec![vec![0.0; branches.len()]; n_loops];
    for (row, &link) in links.iter().enumerate() {
        let coeffs = &mut b_rows[row];
        coeffs[link] = 1.0;
        // climb both endpoints to their lowest common ancestor
        let (mut u, mut v) = (branches[link].b, branches[link].a);
        // path b -> lca contributes travel signs directly
        while depth[u] > depth[v] {
            let (p, k) = parent[u].expect("non-root has a parent");
            coeffs[k] += travel_sign(k, u, p);
            u = p;
        }
        // path lca -> a is the reverse of climbing a -> lca
        while depth[v] > depth[u] {
            let (p, k) = parent[v].expect("non-root has a parent");
            coeffs[k] -= travel_sign(k, v, p);
            v = p;
        }
        while u != v {
            let (pu, ku) = parent[u].expect("non-root has a parent");
            coeffs[ku] += travel_sign(ku, u, pu);
            u = pu;
            let (pv, kv) = parent[v].expect("non-root has a parent");
            coeffs[kv] -= travel_sign(kv, v, pv);
            v = pv;
        }
    }

    // Loop impedance matrix and EMF vector.
    let mut z_loop = Mat::<c64>::zeros(n_loops, n_loops);
    let mut rhs = Mat::<c64>::zeros(n_loops, 1);
    for i in 0..n_loops {
        for j in 0..n_loops {
            let mut sum = c64::new(0.0, 0.0);
            for (k, br) in branches.iter().enumerate() {
                if b_rows[i][k] != 0.0 && b_rows[j][k] != 0.0 {
                    sum += br.z * (b_rows[i][k] * b_rows[j][k]);
                }
            }
            z_loop[(i, j)] = sum;
        }
        let mut e = c64::new(0.0, 0.0);
        for (k, br) in branches.iter().enumerate() {
            if b_rows[i][k] != 0.0 {
                e += br.emf * b_rows[i][k];
            }
        }
        rhs[(i, 0)] = e;
    }

    let currents = z_loop.partial_piv_lu().solve(&rhs);
    let mut i_src = c64::new(0.0, 0.0);
    for i in 0..n_loops {
        i_src += currents[(i, 0)] * b_rows[i][src];
    }
    if !(i_src.re.is_finite() && i_src.im.is_finite()) || i_src.norm() == 0.0 {
        return Err(Error::SingularSystem { omega });
    }
    Ok(c64::new(1.0, 0.0) / i_src)
}
