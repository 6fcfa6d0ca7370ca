//! Unit conversions into the internal system (mm, N, MPa, µg, day).
//!
//! Mass-specific energies are carried in MPa·mm³/µg, which equals mJ/µg.

/// 1 J/µg expressed in MPa·mm³/µg.
pub const JOULE_PER_UG: f64 = 1e3;
/// 1 kPa in MPa.
pub const KPA: f64 = 1e-3;
/// 1 Pa in MPa.
pub const PA: f64 = 1e-6;

/// Conversion factor for a stress unit name.
pub fn stress_factor(unit: &str) -> Option<f64> {
    match unit {
        "MPa" | "N/mm^2" => Some(1.0),
        "kPa" => Some(KPA),
        "Pa" => Some(PA),
        "GPa" => Some(1e3),
        _ => None,
    }
}

/// Conversion factor for a mass-specific energy unit name.
pub fn specific_energy_factor(unit: &str) -> Option<f64> {
    match unit {
        "J/ug" | "J/µg" => Some(JOULE_PER_UG),
        "mJ/ug" | "mJ/µg" | "MPa*mm^3/ug" | "MPa*mm^3/µg" => Some(1.0),
        "uJ/ug" | "µJ/µg" => Some(1e-3),
        _ => None,
    }
}

/// Deserializes a stress given as a bare number (MPa) or `{"value", "unit"}`.
pub fn stress<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(QuantityVisitor {
        kind: "stress",
        factor: stress_factor,
    })
}

/// Deserializes a mass-specific energy given as a bare number (MPa·mm³/µg) or
/// `{"value", "unit"}`.
pub fn specific_energy<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(QuantityVisitor {
        kind: "specific energy",
        factor: specific_energy_factor,
    })
}

struct QuantityVisitor {
    kind: &'static str,
    factor: fn(&str) -> Option<f64>,
}

impl<'de> serde::de::Visitor<'de> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        write!(f, "a number or {{\"value\": number, \"unit\": string}} ({})", self.kind)
    }

    fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_map<A: serde::de::MapAccess<'de>>(self, mut map: A) -> Result<f64, A::Error> {
        use serde::de::Error;
        let mut value = None;
        let mut unit: Option<String> = None;
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "value" => value = Some(map.next_value::<f64>()?),
                "unit" => unit = Some(map.next_value()?),
                other => return Err(A::Error::unknown_field(other, &["value", "unit"])),
            }
        }
        let value = value.ok_or_else(|| A::Error::missing_field("value"))?;
        let unit = unit.ok_or_else(|| A::Error::missing_field("unit"))?;
        let factor = (self.factor)(&unit).ok_or_else(|| A::Error::custom(format!("unknown {} unit '{unit}'", self.kind)))?;
        Ok(value * factor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(serde::Deserialize)]
    struct Probe {
        #[serde(deserialize_with = "stress")]
        p: f64,
        #[serde(deserialize_with = "specific_energy")]
        e: f64,
    }

    #[test]
    fn quantities_are_normalized() {
        let q: Probe = serde_json::from_str(r#"{"p": {"value": 2, "unit": "kPa"}, "e": {"value": 2e-5, "unit": "J/ug"}}"#).unwrap();
        assert_eq!(q.p, 2e-3);
        assert!((q.e - 0.02).abs() < 1e-18);
        let q: Probe = serde_json::from_str(r#"{"p": 0.5, "e": 3}"#).unwrap();
        assert_eq!((q.p, q.e), (0.5, 3.0));
        assert!(serde_json::from_str::<Probe>(r#"{"p": {"value": 1, "unit": "bar"}, "e": 1}"#).is_err());
        assert!(serde_json::from_str::<Probe>(r#"{"p": {"value": 1}, "e": 1}"#).is_err());
    }
}
