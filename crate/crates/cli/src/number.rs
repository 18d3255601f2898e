//! Integer flags written as `1000000`, `1e6`, `2.5e3` or `1_000_000`.
//! The value must come out integral; `1.5` and `1e-1` are rejected.

/// Parses an unsigned integer in plain or scientific notation, exactly.
pub fn parse_integer(text: &str) -> Result<u64, String> {
    let cleaned: String = text.trim().chars().filter(|&c| c != '_').collect();
    if cleaned.is_empty() {
        return Err("empty number".into());
    }
    let (mantissa, exponent) = match cleaned.find(['e', 'E']) {
        Some(i) => {
            let exp: i32 = cleaned[i + 1..]
                .trim_start_matches('+')
                .parse()
                .map_err(|_| format!("bad exponent in `{text}`"))?;
            (&cleaned[..i], exp)
        }
        None => (cleaned.as_str(), 0),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(format!("`{text}` is not a number"));
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(format!("`{text}` is not a non-negative integer"));
    }
    // value = digits * 10^(exponent - frac.len())
    let digits = format!("{whole}{frac}");
    let digits = digits.trim_start_matches('0');
    let shift = exponent as i64 - frac.len() as i64;
    if digits.is_empty() {
        return Ok(0);
    }
    let (kept, dropped) = if shift >= 0 {
        (digits.to_string(), "")
    } else {
        let cut = digits.len() as i64 + shift;
        if cut <= 0 {
            ("".to_string(), digits)
        } else {
            (digits[..cut as usize].to_string(), &digits[cut as usize..])
        }
    };
    if dropped.chars().any(|c| c != '0') {
        return Err(format!("`{text}` is not an integer"));
    }
    let mut value: u64 = if kept.is_empty() {
        0
    } else {
        kept.parse().map_err(|_| format!("`{text}` overflows 64 bits"))?
    };
    for _ in 0..shift.max(0) {
        value = value
            .checked_mul(10)
            .ok_or_else(|| format!("`{text}` overflows 64 bits"))?;
    }
    Ok(value)
}
