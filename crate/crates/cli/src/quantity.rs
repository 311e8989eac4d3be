//! Physical quantities written as `"<number> <unit>"` strings in configs.

use ramsey_wigner::units::{UnitSystem, ATOMIC_MASS_UNIT, BOLTZMANN};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    /// Trap depths: temperatures, joules or recoil energies.
    Energy,
    Length,
    Time,
    Mass,
}

/// Splits `"18 uK"` / `"18uK"` into value and unit.
fn split(text: &str) -> Result<(f64, &str, &str), CliError> {
    let t = text.trim();
    let at = t
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(t.len());
    // an exponent marker directly followed by a unit letter belongs to the unit
    let (mut num, mut unit) = t.split_at(at);
    if num.ends_with(['e', 'E']) {
        let cut = num.len() - 1;
        (num, unit) = t.split_at(cut);
    }
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("cannot read a number from {text:?}")))?;
    if !value.is_finite() {
        return Err(CliError::Config(format!("{text:?} is not finite")));
    }
    Ok((value, num.trim(), unit.trim()))
}

/// Decimal exponent of an SI prefix in front of `base`.
fn prefix(unit: &str, base: &str) -> Option<i32> {
    match unit.strip_suffix(base)? {
        "" => Some(0),
        "m" => Some(-3),
        "u" | "µ" | "μ" => Some(-6),
        "n" => Some(-9),
        _ => None,
    }
}

/// value·10^exp, rounded once from the decimal text so that "15 us" gives
/// exactly the same f64 as the literal 15e-6.
fn scaled(num: &str, exp: i32) -> f64 {
    let (mantissa, e) = match num.find(['e', 'E']) {
        Some(i) => (&num[..i], num[i + 1..].parse::<i32>().unwrap_or(0)),
        None => (num, 0),
    };
    format!("{mantissa}e{}", e + exp)
        .parse()
        .unwrap_or(f64::NAN)
}

/// Parses `text` as a quantity of the given dimension and returns it in SI
/// units: kelvin for energies (k_B·T equivalent), metres, seconds, kilograms.
/// Recoil energies need `units`.
pub fn parse(text: &str, dim: Dimension, units: Option<&UnitSystem>) -> Result<f64, CliError> {
    let (value, num, unit) = split(text)?;
    let bad = || {
        CliError::Config(format!(
            "unit {unit:?} in {text:?} is not a valid {dim:?} unit"
        ))
    };
    let si = match dim {
        Dimension::Energy => match unit {
            "J" => value / BOLTZMANN,
            "Erec" => {
                let u = units
                    .ok_or_else(|| CliError::Config("Erec needs the atom parameters".into()))?;
                value * u.recoil_energy() / BOLTZMANN
            }
            u if u.chars().count() <= 2 => scaled(num, prefix(u, "K").ok_or_else(bad)?),
            _ => return Err(bad()),
        },
        Dimension::Length => match unit {
            "m" => value,
            u => scaled(
                num,
                prefix(u, "m")
                    .filter(|_| u.chars().count() == 2)
                    .ok_or_else(bad)?,
            ),
        },
        Dimension::Time => scaled(num, prefix(unit, "s").ok_or_else(bad)?),
        Dimension::Mass => match unit {
            "u" => value * ATOMIC_MASS_UNIT,
            "kg" => value,
            _ => return Err(bad()),
        },
    };
    Ok(si)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-300)
    }

    #[test]
    fn parses_supported_units() {
        let u = UnitSystem::caesium_866();
        assert!(close(
            parse("18 uK", Dimension::Energy, None).unwrap(),
            18e-6
        ));
        assert!(close(
            parse("18µK", Dimension::Energy, None).unwrap(),
            18e-6
        ));
        assert!(close(
            parse("250 nK", Dimension::Energy, None).unwrap(),
            250e-9
        ));
        assert!(close(
            parse("0.02 mK", Dimension::Energy, None).unwrap(),
            2e-5
        ));
        assert!(close(parse("1 K", Dimension::Energy, None).unwrap(), 1.0));
        assert!(close(
            parse("1.380649e-23 J", Dimension::Energy, None).unwrap(),
            1.0
        ));
        let erec = parse("190 Erec", Dimension::Energy, Some(&u)).unwrap();
        assert!(close(erec, 190.0 * u.recoil_energy() / BOLTZMANN));
        assert!(close(
            parse("866 nm", Dimension::Length, None).unwrap(),
            866e-9
        ));
        assert!(close(
            parse("1.5 um", Dimension::Length, None).unwrap(),
            1.5e-6
        ));
        assert!(close(parse("2 mm", Dimension::Length, None).unwrap(), 2e-3));
        assert!(close(
            parse("1e-6 m", Dimension::Length, None).unwrap(),
            1e-6
        ));
        assert!(close(
            parse("300 ns", Dimension::Time, None).unwrap(),
            300e-9
        ));
        assert!(close(parse("15 us", Dimension::Time, None).unwrap(), 15e-6));
        assert!(close(parse("2 ms", Dimension::Time, None).unwrap(), 2e-3));
        assert!(close(parse("1 s", Dimension::Time, None).unwrap(), 1.0));
        assert!(close(
            parse("133 u", Dimension::Mass, None).unwrap(),
            133.0 * ATOMIC_MASS_UNIT
        ));
        assert!(close(
            parse("2e-25 kg", Dimension::Mass, None).unwrap(),
            2e-25
        ));
    }

    #[test]
    fn rejects_wrong_or_missing_units() {
        for (text, dim) in [
            ("18", Dimension::Energy),
            ("18 us", Dimension::Energy),
            ("3 kK", Dimension::Energy),
            ("5 s", Dimension::Length),
            ("5 nm", Dimension::Time),
            ("x uK", Dimension::Energy),
            ("1 g", Dimension::Mass),
        ] {
            assert!(
                matches!(parse(text, dim, None), Err(CliError::Config(_))),
                "{text}"
            );
        }
        assert!(parse("190 Erec", Dimension::Energy, None).is_err());
    }
}
