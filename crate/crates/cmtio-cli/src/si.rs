//! SI-suffix value parser for the config boundary: "2.923GHz", "444kHz",
//! "20pF", "2.73nH", "0.4". Internal storage is base SI; the schema layer
//! converts into the unit each field documents (mA, mm, ...).

use std::fmt;

/// Physical unit carried by a parsed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Hertz,
    Henry,
    Farad,
    Ohm,
    Ampere,
    Meter,
    Tesla,
    Second,
    /// Bare number.
    None,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::Hertz => "Hz",
            Unit::Henry => "H",
            Unit::Farad => "F",
            Unit::Ohm => "Ohm",
            Unit::Ampere => "A",
            Unit::Meter => "m",
            Unit::Tesla => "T",
            Unit::Second => "s",
            Unit::None => "(dimensionless)",
        };
        f.write_str(s)
    }
}

/// A value parsed from an SI-suffixed string: base-SI magnitude, unit, and
/// whether a `/mm` divisor was attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiValue {
    pub value: f64,
    pub unit: Unit,
    pub per_mm: bool,
}

fn prefix_factor(prefix: &str) -> Option<f64> {
    Some(match prefix {
        "" => 1.0,
        "a" => 1e-18,
        "f" => 1e-15,
        "p" => 1e-12,
        "n" => 1e-9,
        "u" | "\u{00b5}" | "\u{03bc}" => 1e-6,
        "m" => 1e-3,
        "k" => 1e3,
        "M" => 1e6,
        "G" => 1e9,
        "T" => 1e12,
        _ => return None,
    })
}

const UNITS: &[(&str, Unit)] = &[
    ("Hz", Unit::Hertz),
    ("Ohm", Unit::Ohm),
    ("ohm", Unit::Ohm),
    ("\u{03a9}", Unit::Ohm),
    ("\u{2126}", Unit::Ohm),
    ("H", Unit::Henry),
    ("F", Unit::Farad),
    ("A", Unit::Ampere),
    ("m", Unit::Meter),
    ("T", Unit::Tesla),
    ("s", Unit::Second),
];

/// Parse a number with optional SI prefix, unit suffix, and `/mm` divisor.
pub fn parse_si(text: &str) -> Result<SiValue, String> {
    let trimmed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if trimmed.is_empty() {
        return Err("empty value".into());
    }
    let (body, per_mm) = match trimmed.strip_suffix("/mm") {
        Some(rest) => (rest, true),
        None => (trimmed.as_str(), false),
    };

    // split the trailing letter block from the numeric part; a trailing
    // digit or '.' ends the suffix (exponents like "2e9" end in digits, so
    // they never leak into the suffix)
    let mut boundary = body.len();
    for (idx, ch) in body.char_indices().rev() {
        if ch.is_ascii_digit() || ch == '.' {
            break;
        }
        boundary = idx;
    }
    let (number_part, suffix) = body.split_at(boundary);
    let number: f64 = number_part
        .parse()
        .map_err(|_| format!("'{text}': cannot parse numeric part '{number_part}'"))?;

    if suffix.is_empty() {
        return Ok(SiValue { value: number, unit: Unit::None, per_mm });
    }
    for &(name, unit) in UNITS {
        if let Some(prefix) = suffix.strip_suffix(name) {
            if let Some(factor) = prefix_factor(prefix) {
                return Ok(SiValue { value: number * factor, unit, per_mm });
            }
        }
    }
    Err(format!("'{text}': unknown unit suffix '{suffix}'"))
}

/// Parse expecting a specific unit; a bare number is accepted as-is, in
/// whatever unit the calling field documents.
pub fn parse_in_unit(text: &str, expected: Unit, field: &str) -> Result<f64, String> {
    let parsed = parse_si(text)?;
    if parsed.per_mm {
        return Err(format!("{field}: unexpected /mm divisor in '{text}'"));
    }
    match parsed.unit {
        Unit::None => Ok(parsed.value),
        u if u == expected => Ok(parsed.value),
        other => Err(format!("{field}: expected {expected}, got {other} in '{text}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14 * b.abs()
    }

    #[test]
    fn parses_the_documented_examples() {
        let v = parse_si("2.923GHz").unwrap();
        assert!(close(v.value, 2.923e9) && v.unit == Unit::Hertz && !v.per_mm);
        assert!(close(parse_si("444kHz").unwrap().value, 444e3));
        let v = parse_si("20pF").unwrap();
        assert!(close(v.value, 20e-12) && v.unit == Unit::Farad);
        assert!(close(parse_si("2.73nH").unwrap().value, 2.73e-9));
        assert_eq!(parse_si("0.4").unwrap(), SiValue { value: 0.4, unit: Unit::None, per_mm: false });
    }

    #[test]
    fn resolves_prefix_unit_ambiguities() {
        // milli-Tesla, not meter-anything
        let v = parse_si("0.01mT").unwrap();
        assert!(close(v.value, 1e-5) && v.unit == Unit::Tesla);
        // millimeter: prefix m + unit m
        let v = parse_si("1mm").unwrap();
        assert!(close(v.value, 1e-3) && v.unit == Unit::Meter);
        // bare meter and bare Tesla
        assert_eq!(parse_si("2m").unwrap().unit, Unit::Meter);
        assert_eq!(parse_si("2T").unwrap().unit, Unit::Tesla);
        // milliamp and megaohm
        assert!(close(parse_si("150mA").unwrap().value, 0.15));
        assert!(close(parse_si("37MOhm").unwrap().value, 37e6));
        assert!(close(parse_si("884M\u{03a9}").unwrap().value, 884e6));
    }

    #[test]
    fn handles_per_mm_and_exponents() {
        let v = parse_si("1nH/mm").unwrap();
        assert!(close(v.value, 1e-9) && v.unit == Unit::Henry && v.per_mm);
        assert!(close(parse_si("7fF/mm").unwrap().value, 7e-15));
        assert_eq!(parse_si("2e9").unwrap(), SiValue { value: 2e9, unit: Unit::None, per_mm: false });
        assert!(close(parse_si("1.5e-3 A").unwrap().value, 1.5e-3));
        assert!(close(parse_si("2.5 GHz").unwrap().value, 2.5e9));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_si("").is_err());
        assert!(parse_si("fast").is_err());
        assert!(parse_si("1.2.3GHz").is_err());
        assert!(parse_si("10xHz").is_err());
        assert!(parse_in_unit("2GHz", Unit::Farad, "c_m").is_err());
        assert!(parse_in_unit("1nH/mm", Unit::Henry, "l_m").is_err());
    }

    #[test]
    fn expected_unit_accepts_bare_numbers() {
        assert_eq!(parse_in_unit("0.4", Unit::Ohm, "r_wb").unwrap(), 0.4);
        assert_eq!(parse_in_unit("444kHz", Unit::Hertz, "kappa").unwrap(), 444e3);
    }
}
