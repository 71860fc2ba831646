//! Seed lists on the command line: `a..b` (inclusive), `a,b,c`, or one number.

/// Parses a seed list. Ranges are inclusive, so `0..99` yields 100 seeds.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let text = text.trim();
    let number = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("`{s}` is not a seed"));
    let seeds = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (number(a)?, number(b.strip_prefix('=').unwrap_or(b))?);
        if a > b {
            return Err(format!("empty seed range `{text}`"));
        }
        (a..=b).collect()
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    Ok(seeds)
}

/// Parses `a,b,c` as seconds for bin bounds.
pub fn parse_bounds(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))).collect()
}
