//! Adaptive Simpson quadrature for smooth complex integrands.

use std::cell::Cell;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub max_evals: usize,
    /// Number of equal panels the interval is split into before adapting.
    /// Oscillatory integrands need a few panels per period.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_evals: 1 << 20,
            initial_panels: 16,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: Complex64,
    pub evals: usize,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    depth: u32,
}

const MAX_DEPTH: u32 = 60;

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` to a tolerance relative to the magnitude of
/// the result. The tolerance scale is re-estimated once the adaptive pass
/// finishes, so heavy cancellation in oscillatory integrands is caught.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Quadrature>
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Ok(Quadrature {
            value: Complex64::new(0.0, 0.0),
            evals: 0,
        });
    }
    let panels = opts.initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let evals = Cell::new(0usize);
    let eval = |x: f64| {
        evals.set(evals.get() + 1);
        f(x)
    };

    let mut seeds = Vec::with_capacity(panels);
    let mut fa = eval(a);
    let mut estimate = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for i in 0..panels {
        let pa = a + h * i as f64;
        let pb = if i + 1 == panels {
            b
        } else {
            a + h * (i + 1) as f64
        };
        let fm = eval(0.5 * (pa + pb));
        let fb = eval(pb);
        let whole = simpson(pa, pb, fa, fm, fb);
        estimate += whole;
        l1 += (pb - pa) / 6.0 * (fa.norm() + 4.0 * fm.norm() + fb.norm());
        seeds.push(Panel {
            a: pa,
            b: pb,
            fa,
            fm,
            fb,
            whole,
            depth: 0,
        });
        fa = fb;
    }

    // Floor keeps an exactly-cancelling integral from refining forever.
    let floor = 1e-6 * opts.rel_tol * l1;
    let mut scale = estimate.norm().max(floor);
    for _round in 0..4 {
        let tol = opts.rel_tol * scale;
        let mut total = Complex64::new(0.0, 0.0);
        let mut stack = seeds.clone();
        while let Some(p) = stack.pop() {
            let m = 0.5 * (p.a + p.b);
            let lm = eval(0.5 * (p.a + m));
            let rm = eval(0.5 * (m + p.b));
            let left = simpson(p.a, m, p.fa, lm, p.fm);
            let right = simpson(m, p.b, p.fm, rm, p.fb);
            let diff = left + right - p.whole;
            let local_tol = tol * (p.b - p.a) / (b - a);
            if diff.norm() <= 15.0 * local_tol || p.depth >= MAX_DEPTH {
                if p.depth >= MAX_DEPTH {
                    log::debug!("quadrature hit depth limit on [{}, {}]", p.a, p.b);
                }
                total += left + right + diff / 15.0;
            } else {
                stack.push(Panel {
                    a: p.a,
                    b: m,
                    fa: p.fa,
                    fm: lm,
                    fb: p.fm,
                    whole: left,
                    depth: p.depth + 1,
                });
                stack.push(Panel {
                    a: m,
                    b: p.b,
                    fa: p.fm,
                    fm: rm,
                    fb: p.fb,
                    whole: right,
                    depth: p.depth + 1,
                });
            }
            if evals.get() > opts.max_evals {
                return Err(Error::numerical(format!(
                    "adaptive Simpson exceeded {} evaluations on [{a}, {b}] (rel_tol {}, running estimate {total})",
                    opts.max_evals, opts.rel_tol
                )));
            }
        }
        let achieved = total.norm().max(floor);
        if achieved >= 0.5 * scale {
            return Ok(Quadrature {
                value: total,
                evals: evals.get(),
            });
        }
        scale = achieved;
    }
    Err(Error::numerical(format!(
        "adaptive Simpson could not settle a tolerance scale on [{a}, {b}]"
    )))
}
