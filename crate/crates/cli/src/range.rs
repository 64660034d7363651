/// Parses `2.5`, `0.5,1,2`, `1..10` (integer steps, inclusive) or
/// `0..2/5` (five evenly spaced points including both ends).
pub fn parse(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if let Some((a, rest)) = text.split_once("..") {
        let (b, count) = match rest.split_once('/') {
            Some((b, n)) => (b, Some(n.trim().parse::<usize>().map_err(|e| format!("point count in {text:?}: {e}"))?)),
            None => (rest, None),
        };
        let a = number(a)?;
        let b = number(b)?;
        if b < a {
            return Err(format!("empty range {text:?}"));
        }
        return Ok(match count {
            Some(0) => return Err(format!("point count in {text:?} must be positive")),
            Some(1) => vec![a],
            Some(n) => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            None => {
                let steps = (b - a + 1e-9).floor() as usize;
                (0..=steps).map(|i| a + i as f64).collect()
            }
        });
    }
    text.split(',').map(number).collect()
}

fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::parse;

    #[test]
    fn forms() {
        assert_eq!(parse("3").unwrap(), vec![3.0]);
        assert_eq!(parse("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse("1..4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse("0..2/5").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("x").is_err());
        assert!(parse("5..1").is_err());
        assert!(parse("0..1/0").is_err());
        assert!(parse("inf").is_err());
    }
}
