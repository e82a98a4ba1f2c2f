mod common;

use common::*;
use matnorm_diag::diagnostics::{
    alignment, dd_series, healy_type_series, mhealy_series, probability_series, separability_dof, separability_lrt,
    PlotKind, PlotMeta, PlotSeries, PlottingPosition, ReferenceLine,
};
use matnorm_diag::distances::{MsdKind, MsdVector};
use matnorm_diag::distributions::{random_spd, sample_matnormal, sample_mvn_matrices, sample_standard_normal, RngStream};
use matnorm_diag::estimation::{flipflop_mle, mvn_fit, mvn_mle, Denominator, FlipFlopConfig};
use matnorm_diag::{Error, MatNormalParams, Matrix, MatrixDataset, MvnParams};

fn params(c: usize, r: usize, stream: RngStream) -> MatNormalParams<f64> {
    let mean = Matrix::from_vec(c, r, sample_standard_normal(stream.split(0), c * r)).unwrap();
    MatNormalParams::new(
        mean,
        random_spd(stream.split(1), c, 100.0).unwrap(),
        random_spd(stream.split(2), r, 100.0).unwrap(),
    )
    .unwrap()
}

fn scalar_params() -> MatNormalParams<f64> {
    MatNormalParams::new(Matrix::zeros(1, 1), Matrix::identity(1), Matrix::identity(1)).unwrap()
}

fn series(kind: PlotKind, dof: usize, points: Vec<(f64, f64)>) -> PlotSeries<f64> {
    PlotSeries {
        kind,
        meta: PlotMeta {
            n_samples: points.len(),
            n_rows: 1,
            n_cols: dof,
            dof,
        },
        points,
        reference: ReferenceLine::Identity,
    }
}

#[test]
fn mhealy_single_sample() {
    let ds = MatrixDataset::from_buffer(1, 1, vec![1.0]).unwrap();
    let s = mhealy_series(&ds, &scalar_params()).unwrap();
    assert_eq!(s.points.len(), 1);
    assert_eq!(s.points[0].0, 1.0);
    assert!((s.points[0].1 - chi2_cdf_quadrature(1, 1.0)).abs() < 1e-12);
}

#[test]
fn mhealy_at_constructed_quantiles() {
    // Scalar data x with M = 0 and unit covariances has distance x^2.
    let probs = [0.4, 0.8, 0.2, 0.6];
    let xs: Vec<f64> = probs
        .iter()
        .map(|&p| quantile_by_bisection(|x| chi2_cdf_quadrature(1, x), p).sqrt())
        .collect();
    let ds = MatrixDataset::from_buffer(1, 1, xs).unwrap();
    let s = mhealy_series(&ds, &scalar_params()).unwrap();
    let want = [(0.25, 0.2), (0.5, 0.4), (0.75, 0.6), (1.0, 0.8)];
    for (got, want) in s.points.iter().zip(want) {
        assert_eq!(got.0, want.0);
        assert!((got.1 - want.1).abs() < 1e-10, "{got:?} vs {want:?}");
    }
    assert_eq!(s.kind, PlotKind::Mhealy);
    assert_eq!(s.meta.dof, 1);
}

#[test]
fn probability_series_positions() {
    let msd = MsdVector {
        values: vec![3.0, 1.0, 2.0],
        dof: 2,
        kind: MsdKind::MatrixBased,
    };
    let meta = PlotMeta {
        n_samples: 3,
        n_rows: 1,
        n_cols: 2,
        dof: 2,
    };
    let nominal = probability_series(&msd, PlotKind::Mhealy, meta, PlottingPosition::Nominal).unwrap();
    let weibull = probability_series(&msd, PlotKind::Mhealy, meta, PlottingPosition::Weibull).unwrap();
    for (i, (a, b)) in nominal.points.iter().zip(&weibull.points).enumerate() {
        assert_eq!(a.0, (i + 1) as f64 / 3.0);
        assert_eq!(b.0, (i + 1) as f64 / 4.0);
        // χ²_2 has cdf 1 - exp(-x/2).
        let want = 1.0 - (-((i + 1) as f64) / 2.0).exp();
        assert!((a.1 - want).abs() < 1e-14 && a.1 == b.1);
    }
}

#[test]
fn mhealy_at_true_parameters_tracks_uniform_order_statistics() {
    let p = params(3, 3, RngStream::new(10, 0));
    let n = 10_000;
    let ds = sample_matnormal(RngStream::new(10, 1), &p, n).unwrap();
    let s = mhealy_series(&ds, &p).unwrap();
    let mean_dev = s
        .points
        .iter()
        .enumerate()
        .map(|(i, &(_, y))| (y - (i + 1) as f64 / (n + 1) as f64).abs())
        .sum::<f64>()
        / n as f64;
    assert!(mean_dev < 2.0 / (n as f64).sqrt(), "{mean_dev}");
    assert!(s.points.windows(2).all(|w| w[0].1 <= w[1].1));
}

#[test]
fn mhealy_is_invariant_to_kronecker_rescaling() {
    let p = params(3, 4, RngStream::new(11, 0));
    let ds = sample_matnormal(RngStream::new(11, 1), &p, 40).unwrap();
    let base = mhealy_series(&ds, &p).unwrap();
    let scaled = mhealy_series(&ds, &p.rescaled(250.0)).unwrap();
    for (a, b) in base.points.iter().zip(&scaled.points) {
        assert_eq!(a.0, b.0);
        assert!((a.1 - b.1).abs() < 1e-12);
    }
}

#[test]
fn dd_with_true_parameters_sits_on_the_identity() {
    let p = params(3, 4, RngStream::new(12, 0));
    let ds = sample_matnormal(RngStream::new(12, 1), &p, 200).unwrap();
    let s = dd_series(&ds, &p, &p.to_mvn()).unwrap();
    assert_eq!(s.kind, PlotKind::Dd);
    assert!(s.points.iter().all(|&(x, y)| rel_close(x, y, 1e-10)));
    assert!(alignment(&s).unwrap().max_abs_dev < 1e-10);
    assert_eq!(alignment(&s).unwrap().ks_like_stat, None);
}

#[test]
fn alignment_known_values() {
    let one = alignment(&series(PlotKind::Mhealy, 1, vec![(0.5, 0.7)])).unwrap();
    assert!((one.max_abs_dev - 0.2).abs() < 1e-15);
    assert!((one.mean_abs_dev - 0.2).abs() < 1e-15);
    assert!((one.ks_like_stat.unwrap() - 0.7).abs() < 1e-15);

    let on_line: Vec<(f64, f64)> = (1..=8).map(|i| (i as f64 / 8.0, i as f64 / 8.0)).collect();
    let a = alignment(&series(PlotKind::HealyType, 3, on_line)).unwrap();
    assert_eq!((a.max_abs_dev, a.mean_abs_dev), (0.0, 0.0));
    assert_eq!(a.ks_like_stat, Some(0.125));

    let dd = alignment(&series(PlotKind::Dd, 4, vec![(4.0, 6.0), (4.0, 4.0)])).unwrap();
    assert_eq!((dd.max_abs_dev, dd.mean_abs_dev), (0.5, 0.25));
    assert!(alignment(&series(PlotKind::Mhealy, 1, vec![])).is_err());
}

#[test]
fn healy_equals_mhealy_for_single_column_data() {
    let (c, n) = (5, 60);
    let p = params(c, 1, RngStream::new(13, 0));
    let ds = sample_matnormal(RngStream::new(13, 1), &p, n).unwrap();
    let fit = flipflop_mle(&ds, &FlipFlopConfig::default()).unwrap();
    let vec_fit = mvn_fit(&ds.vectorized(), Denominator::MaximumLikelihood).unwrap();
    let m = mhealy_series(&ds, &fit.params).unwrap();
    let h = healy_type_series(&ds, &vec_fit).unwrap();
    for (a, b) in m.points.iter().zip(&h.points) {
        assert_eq!(a.0, b.0);
        assert!((a.1 - b.1).abs() < 1e-9, "{a:?} vs {b:?}");
    }
}

#[test]
fn healy_type_aligns_in_low_dimension() {
    let cov = random_spd(RngStream::new(14, 0), 4, 100.0).unwrap();
    let mvn = MvnParams::new(vec![1.0, -1.0, 0.5, 2.0], cov).unwrap();
    let ds = sample_mvn_matrices(RngStream::new(14, 1), &mvn, 1000, 2, 2).unwrap();
    let s = healy_type_series(&ds, &mvn_mle(&ds.vectorized()).unwrap()).unwrap();
    let a = alignment(&s).unwrap();
    assert!(a.max_abs_dev < 0.06, "{a:?}");
}

#[test]
fn healy_type_bends_in_high_dimension_while_mhealy_aligns() {
    let p = params(30, 30, RngStream::new(15, 0));
    let ds = sample_matnormal(RngStream::new(15, 1), &p, 1000).unwrap();
    let h = healy_type_series(&ds, &mvn_mle(&ds.vectorized()).unwrap()).unwrap();
    let fit = flipflop_mle(&ds, &FlipFlopConfig::default()).unwrap();
    let m = mhealy_series(&ds, &fit.params).unwrap();
    let (ah, am) = (alignment(&h).unwrap(), alignment(&m).unwrap());
    assert!(ah.max_abs_dev > 0.15, "{ah:?}");
    assert!(am.max_abs_dev < 0.06, "{am:?}");
}

#[test]
fn lrt_degrees_of_freedom() {
    assert_eq!(separability_dof(1, 1), 0);
    assert_eq!(separability_dof(2, 1), 0);
    assert_eq!(separability_dof(2, 2), 5);
    assert_eq!(separability_dof(3, 2), 21 - (6 + 3 - 1));
    let ds = MatrixDataset::from_buffer(1, 1, (0..10).map(f64::from).collect()).unwrap();
    assert!(matches!(separability_lrt(&ds), Err(Error::DegenerateTest(_))));
    let p = params(2, 2, RngStream::new(16, 0));
    let ds = sample_matnormal(RngStream::new(16, 1), &p, 4).unwrap();
    assert!(matches!(separability_lrt(&ds), Err(Error::CovarianceSingular(_))));
}

#[test]
fn lrt_matches_dense_oracle() {
    let (c, r, n) = (2, 3, 300);
    let p = params(c, r, RngStream::new(17, 0));
    let ds = sample_matnormal(RngStream::new(17, 1), &p, n).unwrap();
    let got = separability_lrt(&ds).unwrap();
    let vecs: Vec<Vec<f64>> = (0..n).map(|i| brute_vec(&to_rows(&ds.sample_matrix(i)))).collect();
    let d = c * r;
    let mean: Vec<f64> = (0..d).map(|k| vecs.iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
    let mut s = vec![vec![0.0; d]; d];
    for v in &vecs {
        for a in 0..d {
            for b in 0..d {
                s[a][b] += (v[a] - mean[a]) * (v[b] - mean[b]) / n as f64;
            }
        }
    }
    let fit = flipflop_mle(&ds, &FlipFlopConfig::default()).unwrap();
    let want = n as f64
        * (c as f64 * dense_logdet(&to_rows(&fit.params.row_cov))
            + r as f64 * dense_logdet(&to_rows(&fit.params.col_cov))
            - dense_logdet(&s));
    assert!(rel_close(got.statistic, want, 1e-8), "{} vs {want}", got.statistic);
    assert_eq!(got.dof, separability_dof(c, r));
    assert!(rel_close(got.p_value, 1.0 - chi2_cdf_quadrature(got.dof, got.statistic), 1e-8));
}

#[test]
fn lrt_is_invariant_under_row_and_column_transforms() {
    let (c, r) = (3, 2);
    let p = params(c, r, RngStream::new(18, 0));
    let ds = sample_matnormal(RngStream::new(18, 1), &p, 200).unwrap();
    let mut rng = TestRng::new(18);
    let a = rng.matrix(c, c).add(&Matrix::identity(c).scale(3.0)).unwrap();
    let b = rng.matrix(r, r).add(&Matrix::identity(r).scale(3.0)).unwrap();
    let moved = ds.map_samples(|x| a.matmul(&x).unwrap().matmul(&b).unwrap()).unwrap();
    let scaled = ds.map_samples(|x| x.scale(1e3)).unwrap();
    let base = separability_lrt(&ds).unwrap().statistic;
    assert!(rel_close(separability_lrt(&moved).unwrap().statistic, base, 1e-6));
    assert!(rel_close(separability_lrt(&scaled).unwrap().statistic, base, 1e-6));
}
