/// Central-difference estimate `(f(w+h) − f(w−h)) / 2h` for every coordinate.
pub fn finite_difference_gradients<F>(mut loss_fn: F, params: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = params.to_vec();
    (0..params.len())
        .map(|i| {
            let w = probe[i];
            probe[i] = w + h;
            let up = loss_fn(&probe);
            probe[i] = w - h;
            let down = loss_fn(&probe);
            probe[i] = w;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, and 0 when both vectors vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied()).max(norm(&mut b.iter().copied()));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let g = finite_difference_gradients(|w| w[0] * w[0], &[3.0], 1e-5);
        assert!((g[0] - 6.0).abs() <= 1e-8);
    }

    #[test]
    fn constant_has_zero_gradient() {
        let g = finite_difference_gradients(|_| 4.2, &[1.0, -2.0, 3.0], 1e-5);
        assert!(g.iter().all(|v| v.abs() <= 1e-10));
    }

    #[test]
    fn relative_error_basics() {
        assert_eq!(relative_error(&[0.0], &[0.0]), 0.0);
        assert_eq!(relative_error(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert!((relative_error(&[1.0], &[0.0]) - 1.0).abs() < 1e-15);
    }
}
