//! Composite Gauss-Legendre rules used for time integrals of kernel energies.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

const POINTS: usize = 16;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(POINTS).unwrap()))
}

/// `int_a^b f` with a single 16-point panel.
pub fn panel<F: FnMut(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    rule().integrate(a, b, f)
}

/// `int_0^len f(u) du` for integrands that vary on a scale as small as
/// `finest` near `u = 0`: panels halve in width toward the origin until they
/// are below `finest`.
pub fn graded_from_zero<F: FnMut(f64) -> f64>(len: f64, finest: f64, mut f: F) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut hi = len;
    while hi > finest {
        let lo = 0.5 * hi;
        total += panel(lo, hi, &mut f);
        hi = lo;
    }
    total + panel(0.0, hi, &mut f)
}
