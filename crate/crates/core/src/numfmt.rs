//! Human-readable number formatting.

/// `digits` significant figures in positional notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.999995 → 10.00000).
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded != 0.0 && (rounded.abs().log10().floor() as i32) > magnitude && decimals > 0 {
        let d = decimals - 1;
        return format!("{x:.d$}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carries_into_new_digit() {
        assert_eq!(format_sig(9.9999996, 6), "10.0000");
        assert_eq!(format_sig(0.000327, 3), "0.000327");
        assert_eq!(format_sig(13.6, 5), "13.600");
    }
}
