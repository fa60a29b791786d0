//! Order-independent, correctly rounded f64 summation.
//!
//! The condensation engine promises exact permutation equivariance: relabeling
//! the input rows must permute the output bit-for-bit. Naive left-to-right
//! accumulation breaks that promise because float addition is not associative,
//! so every reduction on the engine path (affinity row sums, kernel row sums,
//! operator application) goes through `sum`/`dot` below. They maintain a list
//! of nonoverlapping partials whose exact total is the true sum, then round
//! once at the end; the result depends only on the multiset of inputs.

/// Correctly rounded sum of the inputs, independent of their order.
///
/// Inputs must be finite; intermediate overflow is undefined behavior of the
/// algorithm (callers in this crate validate finiteness upstream).
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::with_capacity(8);
    for mut x in values {
        let mut kept = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }

    // Round the exact expansion total to the nearest f64. Summing from the
    // largest partial downward is exact until the first inexact add; a final
    // check settles the round-to-even halfway case against the next partial.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut total = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = total;
        n -= 1;
        let y = partials[n];
        total = x + y;
        let yr = total - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = total + y;
        if y == x - total {
            total = x;
        }
    }
    total
}

/// Order-independent dot product: the products are rounded individually and
/// then summed exactly, so any permutation applied consistently to both slices
/// yields the identical bit pattern.
pub fn dot<'a, A, B>(a: A, b: B) -> f64
where
    A: IntoIterator<Item = &'a f64>,
    B: IntoIterator<Item = &'a f64>,
{
    sum(a.into_iter().zip(b).map(|(x, y)| x * y))
}
