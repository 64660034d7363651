use super::GrowthFunction;
use crate::error::{Error, Result};
use crate::numeric::geomspace;
use crate::scalar::golden;

/// Flattens `u` to its minimum value on `[0, r̲]`, where `r̲` is the global
/// minimizer located on `{0} ∪ [10⁻⁶, 10⁸]` and refined by golden section.
/// Returns `u` itself when the minimum is at `r = 0`.
pub fn monotone_envelope(u: &GrowthFunction) -> Result<GrowthFunction> {
    let mut grid = vec![0.0];
    grid.extend(geomspace(1e-6, 1e8, 1401));
    let mut vals = Vec::with_capacity(grid.len());
    for &r in &grid {
        vals.push(u.log_eval(r)?);
    }
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[best] {
            best = i;
        }
    }
    if best == grid.len() - 1 {
        return Err(Error::MinimizerNotBracketed);
    }
    if best == 0 {
        return Ok(u.clone());
    }
    let (a, b) = (grid[best - 1], grid[best + 1]);
    let mut f = |r: f64| u.log_eval(r);
    let (r_ref, v_ref) = golden(&mut f, a, b, 1e-14 * b.max(1.0), 200)?;
    let (r_min, log_floor) = if v_ref < vals[best] {
        (r_ref, v_ref)
    } else {
        (grid[best], vals[best])
    };
    Ok(GrowthFunction::envelope_of(u, r_min, log_floor))
}
