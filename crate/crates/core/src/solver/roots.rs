//! Bracketed scalar root finding for the Lagrange multipliers.
//!
//! Multipliers live on `(0, ∞)` and are searched in `s = ln λ`. A bracket is
//! first obtained by geometric expansion (factor 4 from an initial guess),
//! then shrunk with the Illinois variant of regula falsi, which keeps the
//! bracket at every step and falls back to bisection whenever an
//! interpolated point would not shrink it enough.

use crate::error::{AbwError, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop when the bracket in `ln λ` is narrower than this.
    pub x_tol: f64,
    /// Stop when `|f| ≤ f_tol`.
    pub f_tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Finds a sign change of `f` on `(0, ∞)` for a function that is monotone
/// in its argument (either direction), starting from `guess` and expanding
/// by `factor`. Returns `(a, f(a), b, f(b))` with `a < b`.
pub fn expand_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    guess: f64,
    factor: f64,
    decreasing: bool,
    max_iter: usize,
    what: &'static str,
) -> Result<(f64, f64, f64, f64)> {
    let mut x = guess;
    let mut fx = f(x);
    if fx == 0.0 {
        return Ok((x, fx, x, fx));
    }
    // for a decreasing f, f > 0 means the root lies to the right
    let go_up = (fx > 0.0) == decreasing;
    for _ in 0..max_iter {
        let y = if go_up { x * factor } else { x / factor };
        let fy = f(y);
        if fy == 0.0 || (fy > 0.0) != (fx > 0.0) {
            return Ok(if go_up { (x, fx, y, fy) } else { (y, fy, x, fx) });
        }
        x = y;
        fx = fy;
        if !x.is_finite() || x == 0.0 {
            break;
        }
    }
    Err(AbwError::Convergence {
        what,
        iterations: max_iter,
        residual: fx,
    })
}

/// Illinois iteration on `[a, b]` in the variable passed to `f`.
/// `f(a)` and `f(b)` must have opposite signs (or one of them be zero).
pub fn illinois<F: FnMut(f64) -> f64>(
    mut f: F,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    opts: RootOptions,
    what: &'static str,
) -> Result<Root> {
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, iterations: 0 });
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(AbwError::Convergence {
            what,
            iterations: 0,
            residual: fa.abs().min(fb.abs()),
        });
    }
    let mut side = 0i8;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for it in 1..=opts.max_iter {
        let width = (b - a).abs();
        let mut x = (a * fb - b * fa) / (fb - fa);
        // keep interpolation away from the ends; otherwise bisect
        let margin = 0.01 * width;
        if !x.is_finite() || x <= a.min(b) + margin || x >= a.max(b) - margin {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= opts.f_tol || width <= opts.x_tol {
            return Ok(Root {
                x: best.0,
                fx: best.1,
                iterations: it,
            });
        }
        if (fx > 0.0) == (fb > 0.0) {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    if (b - a).abs() <= opts.x_tol * 10.0 {
        return Ok(Root {
            x: best.0,
            fx: best.1,
            iterations: opts.max_iter,
        });
    }
    Err(AbwError::Convergence {
        what,
        iterations: opts.max_iter,
        residual: best.1,
    })
}

/// Root of a monotone `f` on `(0, ∞)`: expand from `guess` by a factor of 4,
/// then solve in `ln λ`.
pub fn positive_root<F: FnMut(f64) -> f64>(
    mut f: F,
    guess: f64,
    decreasing: bool,
    opts: RootOptions,
    what: &'static str,
) -> Result<Root> {
    let (a, fa, b, fb) = expand_bracket(&mut f, guess, 4.0, decreasing, opts.max_iter, what)?;
    if a == b {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    let r = illinois(|s| f(s.exp()), (a.ln(), fa), (b.ln(), fb), opts, what)?;
    Ok(Root {
        x: r.x.exp(),
        ..r
    })
}
