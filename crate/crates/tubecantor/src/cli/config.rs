//! Flat `key=value` run configuration.
//!
//! Exactly these keys are understood: `d`, `s`, `generations`, `m`, `A`,
//! `C_abs`, `seed`, `max_retries`, `margin`. `m` is either `auto` or a
//! comma-separated density per generation. Blank lines and lines starting
//! with `#` are skipped; anything else must be a single `key=value` pair.

use crate::cantor::{CantorSchedule, MSchedule};
use std::collections::HashMap;

const KEYS: [&str; 9] = [
    "d",
    "s",
    "generations",
    "m",
    "A",
    "C_abs",
    "seed",
    "max_retries",
    "margin",
];

const REQUIRED: [&str; 5] = ["d", "s", "generations", "m", "seed"];

pub fn parse_config(text: &str) -> Result<CantorSchedule, String> {
    let mut values: HashMap<&str, &str> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(format!("line {}: unknown key {key:?}", lineno + 1));
        }
        if values.insert(key, value).is_some() {
            return Err(format!("line {}: duplicate key {key:?}", lineno + 1));
        }
    }
    for key in REQUIRED {
        if !values.contains_key(key) {
            return Err(format!("missing required key {key:?}"));
        }
    }

    fn parse<T: std::str::FromStr>(values: &HashMap<&str, &str>, key: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        values[key]
            .parse()
            .map_err(|e| format!("key {key:?}: {e}"))
    }

    let m_schedule = match values["m"] {
        "auto" => MSchedule::Auto,
        list => MSchedule::Explicit(
            list.split(',')
                .map(|part| {
                    part.trim()
                        .parse::<u64>()
                        .map_err(|e| format!("key \"m\": {e} in {part:?}"))
                })
                .collect::<Result<Vec<u64>, String>>()?,
        ),
    };

    let schedule = CantorSchedule {
        d: parse(&values, "d")?,
        s: parse(&values, "s")?,
        n_generations: parse(&values, "generations")?,
        m_schedule,
        a: match values.get("A") {
            Some(_) => parse(&values, "A")?,
            None => 4,
        },
        c_abs: match values.get("C_abs") {
            Some(_) => parse(&values, "C_abs")?,
            None => 1.0,
        },
        seed: parse(&values, "seed")?,
        max_retries: match values.get("max_retries") {
            Some(_) => parse(&values, "max_retries")?,
            None => 50,
        },
        margin: match values.get("margin") {
            Some(_) => parse(&values, "margin")?,
            None => 0.125,
        },
    };
    schedule.validate().map_err(|e| e.to_string())?;
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# reference run
d=2
s=0.5
generations=2
m=1400000,24000000
A=4
C_abs=1
seed=7
max_retries=50
margin=0.125
";

    #[test]
    fn full_config_parses() {
        let schedule = parse_config(FULL).unwrap();
        assert_eq!(schedule.d, 2);
        assert_eq!(schedule.s, 0.5);
        assert_eq!(schedule.n_generations, 2);
        assert_eq!(
            schedule.m_schedule,
            MSchedule::Explicit(vec![1_400_000, 24_000_000])
        );
        assert_eq!(schedule.seed, 7);
    }

    #[test]
    fn optional_keys_default() {
        let schedule = parse_config("d=2\ns=0.5\ngenerations=1\nm=auto\nseed=3\n").unwrap();
        assert_eq!(schedule.a, 4);
        assert_eq!(schedule.c_abs, 1.0);
        assert_eq!(schedule.max_retries, 50);
        assert_eq!(schedule.margin, 0.125);
        assert_eq!(schedule.m_schedule, MSchedule::Auto);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config("d=2\ns=0.5\ngenerations=1\nm=auto\nseed=3\nmu=9\n").unwrap_err();
        assert!(err.contains("unknown key"), "{err}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = parse_config("d=2\nd=3\ns=0.5\ngenerations=1\nm=auto\nseed=3\n").unwrap_err();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn missing_required_key_is_rejected() {
        let err = parse_config("d=2\ns=0.5\ngenerations=1\nm=auto\n").unwrap_err();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn schedule_length_mismatch_is_rejected() {
        let err = parse_config("d=2\ns=0.5\ngenerations=2\nm=1000\nseed=3\n").unwrap_err();
        assert!(err.contains("generation"), "{err}");
    }

    #[test]
    fn malformed_line_is_rejected() {
        let err = parse_config("d=2\ns 0.5\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
    }
}
