/// Upper-envelope Hoelder exponent estimate from pairwise data
/// `(distance, difference)`: bin distances dyadically, take the max
/// difference per bin, and fit the slope of the bin maxima in log-log.
///
/// This realizes the sup-ratio characterization (the largest `gamma` with
/// `sup |df| / dz^gamma` bounded): for Hoelder data the per-bin maxima are
/// attained by singularity-touching pairs and scale like `dz^gamma`, while
/// a plain least-squares over all pairs would be polluted by the smooth
/// interior (slope one).
pub(crate) fn envelope_exponent(pairs: &[(f64, f64)], noise: f64) -> Option<f64> {
    let filtered: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|&(dz, df)| dz > 1e-12 && df > noise)
        .collect();
    if filtered.len() < 3 {
        return None;
    }
    let dz_max = filtered.iter().map(|p| p.0).fold(f64::MIN, f64::max);
    // dyadic bins downward from dz_max; each bin contributes its maximizing
    // pair at that pair's own distance
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut hi = dz_max * 1.0001;
    for _ in 0..24 {
        let lo = hi / 2.0;
        let mut best: Option<(f64, f64)> = None;
        for &(dz, df) in filtered.iter().filter(|&&(dz, _)| dz > lo && dz <= hi) {
            if best.map_or(true, |(_, b)| df > b) {
                best = Some((dz, df));
            }
        }
        if let Some(b) = best {
            bins.push(b);
        }
        hi = lo;
        if hi < 1e-12 {
            break;
        }
    }
    if bins.len() < 2 {
        return None;
    }
    let n = bins.len() as f64;
    let sx: f64 = bins.iter().map(|b| b.0.ln()).sum();
    let sy: f64 = bins.iter().map(|b| b.1.ln()).sum();
    let sxx: f64 = bins.iter().map(|b| b.0.ln().powi(2)).sum();
    let sxy: f64 = bins.iter().map(|b| b.0.ln() * b.1.ln()).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-30 {
        return None;
    }
    Some((n * sxy - sx * sy) / det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_pure_power_law() {
        let pairs: Vec<(f64, f64)> = (1..40)
            .map(|i| {
                let dz = i as f64 * 0.01;
                (dz, 2.0 * dz.powf(0.6))
            })
            .collect();
        let g = envelope_exponent(&pairs, 1e-12).unwrap();
        assert!((g - 0.6).abs() < 0.05, "slope {g}");
    }

    #[test]
    fn envelope_ignores_smooth_interior_pairs() {
        // mixture: singular pairs df = dz^0.5, smooth pairs df = 0.01 dz
        let mut pairs = Vec::new();
        for i in 1..40 {
            let dz = i as f64 * 0.02;
            pairs.push((dz, dz.powf(0.5)));
            pairs.push((dz, 0.01 * dz));
        }
        let g = envelope_exponent(&pairs, 1e-12).unwrap();
        assert!((g - 0.5).abs() < 0.07, "slope {g}");
    }

    #[test]
    fn all_noise_gives_none() {
        let pairs = vec![(0.1, 1e-15), (0.2, 1e-14)];
        assert!(envelope_exponent(&pairs, 1e-9).is_none());
    }
}
