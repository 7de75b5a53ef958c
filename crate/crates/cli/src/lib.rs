//! Command implementations behind the `shadow-hopf` binary.
//!
//! Every command returns the process exit code it wants on success paths
//! that still carry a verdict (e.g. a hypothesis violation that is reported
//! alongside its values); hard failures are `Err` and are mapped by
//! [`exit_code`].

pub mod exact;
pub mod reproduce;
pub mod run;

use std::path::PathBuf;

use shadow_hopf::Error;

/// Environment variable naming the root directory for command outputs.
pub const OUT_ENV: &str = "SHADOW_HOPF_OUT";

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_HYPOTHESIS: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

/// `$SHADOW_HOPF_OUT`, or `out` in the working directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Exit code for an error escaping a command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::HypothesisViolated { .. }
                | Error::NoStationarySolution { .. }
                | Error::ModulusUnderflow { .. } => EXIT_HYPOTHESIS,
                Error::Config(_) | Error::InvalidParams(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
        }
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
    }
    EXIT_FAILURE
}

/// A command-line mistake that clap cannot catch (e.g. conflicting sources).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// `x` with 17 significant digits, positional where that stays readable.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exponent) {
        format!("{:.*}", (16 - exponent) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

/// Ordered `key=value` record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record(pub Vec<(String, String)>);

impl Record {
    pub fn num(&mut self, key: &str, value: f64) {
        self.0.push((key.into(), sig17(value)));
    }

    pub fn text(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_kv(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Header line and value line.
    pub fn to_csv(&self) -> String {
        let keys: Vec<&str> = self.0.iter().map(|(k, _)| k.as_str()).collect();
        let values: Vec<&str> = self.0.iter().map(|(_, v)| v.as_str()).collect();
        format!("{}\n{}\n", keys.join(","), values.join(","))
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(6.3828409010676614), "6.3828409010676612");
        assert_eq!(sig17(38.929920651496360), "38.929920651496360");
        assert_eq!(sig17(0.0), "0");
        assert_eq!(sig17(-1.5), "-1.5000000000000000");
        assert_eq!(sig17(1e-9), "1.0000000000000001e-9");
        for x in [
            6.3828409010676614,
            38.92992065149636,
            1.234e-3,
            9.99e20,
            -7.1e-8,
        ] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn exit_codes() {
        let e = anyhow::Error::new(Error::HypothesisViolated {
            chi: 1.0,
            delta: 0.5,
        });
        assert_eq!(exit_code(&e), EXIT_HYPOTHESIS);
        let e = anyhow::Error::new(Error::Config(vec!["x".into()])).context("loading");
        assert_eq!(exit_code(&e), EXIT_USAGE);
        let e = anyhow::Error::new(Error::BlowUp { last_finite_t: 3.0 });
        assert_eq!(exit_code(&e), EXIT_FAILURE);
        assert_eq!(
            exit_code(&anyhow::Error::new(UsageError("bad".into()))),
            EXIT_USAGE
        );
        assert_eq!(exit_code(&anyhow::anyhow!("io")), EXIT_FAILURE);
    }

    #[test]
    fn record_formats() {
        let mut r = Record::default();
        r.num("a", 1.0);
        r.text("b", true);
        assert_eq!(r.to_kv(), "a=1.0000000000000000\nb=true\n");
        assert_eq!(r.to_csv(), "a,b\n1.0000000000000000,true\n");
        assert_eq!(r.get("b"), Some("true"));
    }
}
