//! Locale-independent number formatting and CSV rows.

use std::io::{self, Write};

use tailfuse_core::CellResult;

pub const CSV_HEADER: &str =
    "experiment,copula,param,tau,n,transform,gamma,alpha,reps,rejections,estimate,ci_lo,ci_hi,bonf_rejections,ratio,seed";

/// `x` rounded to `digits` significant digits, in plain decimal notation
/// with trailing zeros removed; scientific notation outside `[1e-7, 1e15)`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", digits.max(1) - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits_only: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-7..15).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{sign}{m}e{exp}");
    }
    let s = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits_only)
    } else {
        let int_len = exp as usize + 1;
        if digits_only.len() <= int_len {
            format!("{}{}", digits_only, "0".repeat(int_len - digits_only.len()))
        } else {
            format!("{}.{}", &digits_only[..int_len], &digits_only[int_len..])
        }
    };
    format!("{sign}{}", trim_zeros(&s))
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

const SIG: usize = 9;

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), |v| fmt_sig(v, SIG))
}

fn opt_int(x: Option<u64>) -> String {
    x.map_or_else(|| "NA".into(), |v| v.to_string())
}

pub fn csv_row(r: &CellResult) -> String {
    let (lo, hi) = r.ci().unzip();
    [
        r.experiment.clone(),
        r.copula.clone(),
        opt(r.param),
        opt(r.tau),
        r.n.to_string(),
        r.transform.to_string(),
        fmt_sig(r.gamma, SIG),
        fmt_sig(r.alpha, SIG),
        r.reps.to_string(),
        opt_int(r.rejections()),
        opt(r.estimate()),
        opt(lo),
        opt(hi),
        opt_int(r.bonf_rejections()),
        opt(r.ratio()),
        r.seed.to_string(),
    ]
    .join(",")
}

/// Row appended when a sweep is interrupted: the experiment column reads
/// `TRUNCATED` and every other column is empty.
pub fn truncation_row() -> String {
    format!("TRUNCATED{}", ",".repeat(CSV_HEADER.matches(',').count()))
}

pub struct CsvSink<W: Write> {
    out: W,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        writeln!(out, "{CSV_HEADER}")?;
        Ok(Self { out })
    }

    pub fn rows(&mut self, rows: &[CellResult]) -> io::Result<()> {
        for r in rows {
            writeln!(self.out, "{}", csv_row(r))?;
        }
        self.out.flush()
    }

    pub fn truncated(&mut self) -> io::Result<()> {
        writeln!(self.out, "{}", truncation_row())?;
        self.out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(3.0 / 170.0, 6), "0.0176471");
        assert_eq!(fmt_sig(0.03, 6), "0.03");
        assert_eq!(fmt_sig(0.5, 6), "0.5");
        assert_eq!(fmt_sig(1.0 / 26.0, 6), "0.0384615");
        assert_eq!(fmt_sig(5.0, 9), "5");
        assert_eq!(fmt_sig(5f64.powf(-0.4), 9), "0.525305561");
        assert_eq!(fmt_sig(2f64.sqrt(), 9), "1.41421356");
        assert_eq!(fmt_sig(123456.0, 3), "123000");
        assert_eq!(fmt_sig(-0.25, 6), "-0.25");
        assert_eq!(fmt_sig(1.5e-12, 6), "1.5e-12");
        assert_eq!(fmt_sig(0.005, 9), "0.005");
        assert_eq!(fmt_sig(1e6, 9), "1000000");
    }

    #[test]
    fn truncation_row_has_all_columns() {
        assert_eq!(
            truncation_row().split(',').count(),
            CSV_HEADER.split(',').count()
        );
    }
}
