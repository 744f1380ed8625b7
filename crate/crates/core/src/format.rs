//! Number and CSV formatting shared by the reports.

/// Digits kept after the leading significant digit.
pub const FLOAT_PRECISION: usize = 12;

/// Formats `x` with [`FLOAT_PRECISION`] digits after the leading significant
/// digit, in fixed notation for moderate magnitudes and scientific otherwise,
/// with trailing zeros removed (`2.666666666667`, `0.25`, `3.125e-10`).
pub fn float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", FLOAT_PRECISION, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..=FLOAT_PRECISION as i32).contains(&exp) {
        let decimals = (FLOAT_PRECISION as i32 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Quotes a CSV field when it contains a delimiter, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Joins fields into one CSV record terminated by CRLF.
pub fn csv_record<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut line = fields
        .into_iter()
        .map(|f| csv_field(f.as_ref()))
        .collect::<Vec<_>>()
        .join(",");
    line.push_str("\r\n");
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats() {
        assert_eq!(float(8.0 / 3.0), "2.666666666667");
        assert_eq!(float(16.0 / 9.0), "1.777777777778");
        assert_eq!(float(0.25), "0.25");
        assert_eq!(float(8.0), "8");
        assert_eq!(float(0.0), "0");
        assert_eq!(float(1.0 / 64.0), "0.015625");
        assert_eq!(float(1.0 / 3.2e9), "3.125e-10");
        assert_eq!(float(-1.0 / 3.0), "-0.3333333333333");
        assert_eq!(float(1.0 / 12.0), "0.08333333333333");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_record(["n", "x"]), "n,x\r\n");
    }
}
