use toml::Value;

use super::config::{DspSection, EnergySection, Scenario};
use crate::error::{Error, Result};

/// Copy of `scenario` with the parameter at dotted `path` set to `value`.
///
/// Path segments name table keys or, for arrays, zero-based indices
/// (`plan.carriers.1.power_dbm`). Intermediate tables must exist; a missing leaf is
/// created and then checked by the strict-key parser.
pub fn set_path(scenario: &Scenario, path: &str, value: f64) -> Result<Scenario> {
    let mut base = scenario.clone();
    match path.split('.').next() {
        Some("dsp") if base.dsp.is_none() => base.dsp = Some(DspSection::default()),
        Some("energy") if base.energy.is_none() => base.energy = Some(EnergySection::default()),
        _ => {}
    }
    base.sweep = None;
    let mut root = Value::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;

    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::Config(format!("malformed parameter path `{path}`")));
    }
    let (leaf, parents) = segments.split_last().expect("split yields one segment");
    let mut node = &mut root;
    for (depth, seg) in parents.iter().enumerate() {
        let missing = || {
            Error::Config(format!(
                "unknown parameter path `{path}` at `{}`",
                segments[..=depth].join(".")
            ))
        };
        node = match node {
            Value::Table(t) => t.get_mut(*seg).ok_or_else(missing)?,
            Value::Array(a) => seg
                .parse::<usize>()
                .ok()
                .and_then(|i| a.get_mut(i))
                .ok_or_else(missing)?,
            _ => return Err(missing()),
        };
    }
    let slot = match node {
        Value::Table(t) => {
            let old = t.get(*leaf).cloned();
            let new = coerce(value, old.as_ref(), path)?;
            t.insert(leaf.to_string(), new);
            return finish(root, path);
        }
        Value::Array(a) => leaf.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
        _ => None,
    };
    let slot = slot.ok_or_else(|| Error::Config(format!("unknown parameter path `{path}`")))?;
    *slot = coerce(value, Some(slot), path)?;
    finish(root, path)
}

fn coerce(value: f64, old: Option<&Value>, path: &str) -> Result<Value> {
    match old {
        Some(Value::Integer(_)) => {
            if value.fract() != 0.0 || !(value.abs() < 9.0e15) {
                return Err(Error::Config(format!("`{path}` takes an integer, got {value}")));
            }
            Ok(Value::Integer(value as i64))
        }
        Some(Value::Float(_)) | None => Ok(Value::Float(value)),
        Some(other) => Err(Error::Config(format!(
            "`{path}` is a {}, not a number",
            other.type_str()
        ))),
    }
}

fn finish(root: Value, path: &str) -> Result<Scenario> {
    let s: Scenario = root
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(format!("setting `{path}`: {}", e.message())))?;
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_nested_values() {
        let s = Scenario::default();
        assert_eq!(set_path(&s, "fiber.length_km", 50.0).unwrap().fiber.length_km, 50.0);
        assert_eq!(
            set_path(&s, "plan.carriers.1.power_dbm", 3.0).unwrap().plan.carriers[1].power_dbm,
            3.0
        );
        assert_eq!(set_path(&s, "decoy.mu", 0.6).unwrap().decoy.mu, 0.6);
        let d = set_path(&s, "dsp.impairments.snr_db", 17.0).unwrap();
        assert_eq!(d.dsp.unwrap().impairments.snr_db, Some(17.0));
        assert_eq!(set_path(&s, "dsp.symbols", 4096.0).unwrap().dsp.unwrap().symbols, 4096);
    }

    #[test]
    fn rejects_bad_paths() {
        let s = Scenario::default();
        for p in [
            "fibre.length_km",
            "fiber.lenght",
            "plan.carriers.9.power_dbm",
            "fiber..length_km",
            "name",
        ] {
            assert!(set_path(&s, p, 1.0).is_err(), "{p}");
        }
        assert!(set_path(&s, "dsp.symbols", 10.5).is_err());
        // Values are validated like any loaded scenario.
        assert!(set_path(&s, "fiber.alpha_q", -1.0).is_err());
    }
}
