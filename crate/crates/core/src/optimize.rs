//! Bounded one-dimensional maximisation by golden-section search.

/// `(3 - √5) / 2`, the fraction of the bracket at which interior points sit.
const INV_GOLDEN_SQ: f64 = 0.381_966_011_250_105_1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Maximise a unimodal `f` over `[lo, hi]`. Stops when the bracket is narrower
/// than `xtol` or after `max_iter` iterations. The endpoints are also compared
/// so that a maximum sitting on the boundary is returned exactly.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = a + INV_GOLDEN_SQ * (b - a);
    let mut d = b - INV_GOLDEN_SQ * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > xtol && iterations < max_iter {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = a + INV_GOLDEN_SQ * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = b - INV_GOLDEN_SQ * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let (mut best_x, mut best) = if fc >= fd { (c, fc) } else { (d, fd) };
    for edge in [lo, hi] {
        let fe = f(edge);
        if fe > best {
            best = fe;
            best_x = edge;
        }
    }
    Maximum {
        x: best_x,
        value: best,
        iterations,
    }
}
