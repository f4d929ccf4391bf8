use std::fmt::Write as _;

use eel_core::ExtReal;

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x > 0.0 { "inf".into() } else { x.to_string() };
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-4..1e6).contains(&mag) {
        return format!("{rounded:e}");
    }
    rounded.to_string()
}

pub fn ext(x: ExtReal, machine: bool) -> String {
    match x {
        ExtReal::Infinite => "inf".into(),
        ExtReal::Finite(v) if machine => format!("{v:e}"),
        ExtReal::Finite(v) => sig6(v),
    }
}

pub fn num(x: f64, machine: bool) -> String {
    if machine {
        format!("{x:e}")
    } else {
        sig6(x)
    }
}

pub fn vector(v: &[f64], machine: bool) -> String {
    let mut s = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{}", num(*x, machine));
    }
    s
}

/// `key=value` in machine mode, aligned `key  value` otherwise.
pub fn record(pairs: &[(&str, String)], machine: bool) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in pairs {
        if machine {
            let _ = writeln!(out, "{k}={v}");
        } else {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.235_566_071_312_767), "0.235566");
        assert_eq!(sig6(1.986_913_2), "1.98691");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(f64::INFINITY), "inf");
        assert_eq!(sig6(1.062_113_36e-14), "1.06211e-14");
        assert_eq!(sig6(-2.5e7), "-2.5e7");
    }
}
