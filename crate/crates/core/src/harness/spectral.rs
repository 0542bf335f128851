//! Randomised sweep over the deterministic singular-value inequalities for
//! products `F A` and `A H`, the interlacing facts for submatrices, and the
//! inverse perturbation bound.

use super::bounds::{BoundFamily, BoundReport, DEFAULT_SLACK};
use crate::dense::{jacobi_svd, singular_values, spectral_norm, RealMatrix};
use crate::error::{Error, Result};
use crate::factorization::dense_inverse;
use crate::randgen::{gaussian_matrix, Seed};

/// Ratio `sigma_min / sigma_max` above which a block counts as full rank.
const FULL_RANK_RATIO: f64 = 1e-10;
const SPECTRAL_SIZE_CAP: usize = 32;

fn sv(a: &RealMatrix) -> Vec<f64> {
    singular_values(a).expect("small matrices converge")
}

/// `sigma_j` with `j` 1-based, zero past the end.
fn sigma(s: &[f64], j: usize) -> f64 {
    s.get(j - 1).copied().unwrap_or(0.0)
}

/// `||M^+||` when `M` has full rank, else `None`.
fn full_rank_pinv(s: &[f64]) -> Option<f64> {
    let last = *s.last()?;
    (last > FULL_RANK_RATIO * s[0]).then(|| 1.0 / last)
}

fn block(a: &RealMatrix, rows: usize, cols: usize) -> RealMatrix {
    a.submatrix(0, 0, rows, cols).expect("block within bounds")
}

struct Families {
    eq_fa: BoundFamily,
    eq_ah: BoundFamily,
    cor_i: BoundFamily,
    cor_ii: BoundFamily,
    cor_iii: BoundFamily,
    cor_iv: BoundFamily,
    lead_fa: BoundFamily,
    lead_ah: BoundFamily,
    lead_fa_fixed: BoundFamily,
    lead_ah_fixed: BoundFamily,
    lead_monotone: BoundFamily,
    submatrix: BoundFamily,
    interlace: BoundFamily,
    pinv_monotone: BoundFamily,
    perturbation: BoundFamily,
    perturbation_printed: BoundFamily,
    perturbation_relative: BoundFamily,
}

impl Families {
    fn new() -> Self {
        Self {
            eq_fa: BoundFamily::new("sigma_fa_lower_bound"),
            eq_ah: BoundFamily::new("sigma_ah_lower_bound"),
            cor_i: BoundFamily::new("corollary_i_sigma_r_ah"),
            cor_ii: BoundFamily::new("corollary_ii_pinv_ah"),
            cor_iii: BoundFamily::new("corollary_iii_sigma_r_fa"),
            cor_iv: BoundFamily::new("corollary_iv_pinv_fa"),
            lead_fa: BoundFamily::new("leading_block_pinv_fa"),
            lead_ah: BoundFamily::new("leading_block_pinv_ah"),
            lead_fa_fixed: BoundFamily::new("leading_block_pinv_fa_block_svd").diagnostic(),
            lead_ah_fixed: BoundFamily::new("leading_block_pinv_ah_block_svd").diagnostic(),
            lead_monotone: BoundFamily::new("leading_block_pinv_le_full_pinv"),
            submatrix: BoundFamily::new("submatrix_sigma_dominance"),
            interlace: BoundFamily::new("column_interlacing"),
            pinv_monotone: BoundFamily::new("column_pinv_monotone"),
            perturbation: BoundFamily::new("perturbed_inverse_norm"),
            perturbation_printed: BoundFamily::new("perturbed_inverse_relative_change_as_printed").diagnostic(),
            perturbation_relative: BoundFamily::new("perturbed_inverse_relative_change_standard").diagnostic(),
        }
    }

    fn into_vec(self) -> Vec<BoundFamily> {
        vec![
            self.eq_fa,
            self.eq_ah,
            self.cor_i,
            self.cor_ii,
            self.cor_iii,
            self.cor_iv,
            self.lead_fa,
            self.lead_ah,
            self.lead_monotone,
            self.submatrix,
            self.interlace,
            self.pinv_monotone,
            self.perturbation,
            self.lead_fa_fixed,
            self.lead_ah_fixed,
            self.perturbation_printed,
            self.perturbation_relative,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    /// Rank below both dimensions.
    Deficient,
    /// `m >= n = rank`.
    Tall,
    /// `m = rank <= n`.
    Wide,
}

struct Instance {
    a: RealMatrix,
    f: RealMatrix,
    h: RealMatrix,
    rank: usize,
    shape: Shape,
}

fn draw_instance(seed: Seed, max_size: usize, shape: Shape) -> Result<Instance> {
    let mut s = seed.substream(0).sampler();
    let mut dim = || 1 + s.index(max_size);
    let (mut m, mut n) = (dim(), dim());
    let a;
    let rank;
    match shape {
        Shape::Tall | Shape::Wide => {
            if (shape == Shape::Tall) != (m >= n) {
                std::mem::swap(&mut m, &mut n);
            }
            a = gaussian_matrix(seed.substream(1), m, n)?;
            rank = m.min(n);
        }
        Shape::Deficient => {
            rank = 1 + seed.substream(5).sampler().index(m.min(n));
            let x = gaussian_matrix(seed.substream(1), m, rank)?;
            let y = gaussian_matrix(seed.substream(2), rank, n)?;
            a = x.mat_mul(&y)?;
        }
    }
    let r = 1 + seed.substream(6).sampler().index(rank);
    let f = gaussian_matrix(seed.substream(3), r, m)?;
    let h = gaussian_matrix(seed.substream(4), n, r)?;
    Ok(Instance { a, f, h, rank, shape })
}

fn check_instance(inst: &Instance, trial: usize, fam: &mut Families) -> Result<()> {
    let Instance { a, f, h, rank, shape } = inst;
    let (m, n, r, rho) = (a.rows(), a.cols(), f.rows(), *rank);
    let slack = DEFAULT_SLACK;
    let svd = jacobi_svd(a)?;
    let sa = &svd.singular_values;
    let f_hat = f.mat_mul(&svd.left_factor)?;
    let h_hat = svd.right_factor.transpose().mat_mul(h)?;
    let fa = f.mat_mul(a)?;
    let ah = a.mat_mul(h)?;
    let (sfa, sah) = (sv(&fa), sv(&ah));
    let norm_a = sa[0];
    let scale_fa = spectral_norm(f) * norm_a;
    let scale_ah = spectral_norm(h) * norm_a;
    let ctx = |what: &str| format!("trial {trial} ({m}x{n}, rank {rho}, r {r}) {what}");

    for k in 1..=m {
        let sf = sv(&block(&f_hat, r, k));
        for j in 1..=r.min(k) {
            fam.eq_fa.at_least(sigma(&sfa, j), sigma(sa, k) * sf[j - 1], scale_fa, slack, || ctx(&format!("k={k} j={j}")));
        }
    }
    for l in 1..=n {
        let sh = sv(&block(&h_hat, l, r));
        for j in 1..=r.min(l) {
            fam.eq_ah.at_least(sigma(&sah, j), sigma(sa, l) * sh[j - 1], scale_ah, slack, || ctx(&format!("l={l} j={j}")));
        }
    }

    let sh_rho = sv(&block(&h_hat, rho, r));
    let sf_rho = sv(&block(&f_hat, r, rho));
    let sigma_rho = sigma(sa, rho);
    fam.cor_i.at_least(sigma(&sah, r), sigma_rho * sigma(&sh_rho, r), scale_ah, slack, || ctx("(i)"));
    fam.cor_iii.at_least(sigma(&sfa, r), sigma_rho * sigma(&sf_rho, r), scale_fa, slack, || ctx("(iii)"));
    let pinv_a = 1.0 / sigma_rho;
    if let (Some(p_ah), Some(p_h)) = (full_rank_pinv(&sah[..r.min(sah.len())]), full_rank_pinv(&sh_rho)) {
        if sah.len() >= r {
            fam.cor_ii.at_most(p_ah, pinv_a * p_h, slack, || ctx("(ii)"));
        }
    }
    if let (Some(p_fa), Some(p_f)) = (full_rank_pinv(&sfa[..r.min(sfa.len())]), full_rank_pinv(&sf_rho)) {
        if sfa.len() >= r {
            fam.cor_iv.at_most(p_fa, pinv_a * p_f, slack, || ctx("(iv)"));
        }
    }

    if *shape == Shape::Tall {
        for l in 1..=n {
            let a_ml = block(a, m, l);
            let a_ml_svd = jacobi_svd(&a_ml)?;
            let Some(p_aml) = full_rank_pinv(&a_ml_svd.singular_values) else { continue };
            fam.lead_monotone.at_most(p_aml, pinv_a, slack, || ctx(&format!("A_(m,{l})")));
            for k in 1..=r {
                let Some(p_lead) = full_rank_pinv(&sv(&block(&fa, k, l))) else { continue };
                if let Some(p_fhat) = full_rank_pinv(&sv(&block(&f_hat, k, m))) {
                    fam.lead_fa.at_most(p_lead, p_fhat * p_aml, slack, || ctx(&format!("k={k} l={l}")));
                }
                if k <= l {
                    let f_prime = block(f, k, m).mat_mul(&a_ml_svd.left_factor)?;
                    if let Some(p_fp) = full_rank_pinv(&sv(&block(&f_prime, k, l))) {
                        fam.lead_fa_fixed.at_most(p_lead, p_fp * p_aml, slack, || ctx(&format!("k={k} l={l}")));
                    }
                }
            }
        }
    }
    if *shape == Shape::Wide {
        for k in 1..=m {
            let a_kn = block(a, k, n);
            let a_kn_svd = jacobi_svd(&a_kn)?;
            let Some(p_akn) = full_rank_pinv(&a_kn_svd.singular_values) else { continue };
            fam.lead_monotone.at_most(p_akn, pinv_a, slack, || ctx(&format!("A_({k},n)")));
            for l in 1..=r {
                let Some(p_lead) = full_rank_pinv(&sv(&block(&ah, k, l))) else { continue };
                if let Some(p_hhat) = full_rank_pinv(&sv(&block(&h_hat, n, l))) {
                    fam.lead_ah.at_most(p_lead, p_hhat * p_akn, slack, || ctx(&format!("k={k} l={l}")));
                }
                if l <= k {
                    let h_prime = a_kn_svd.right_factor.transpose().mat_mul(&block(h, n, l))?;
                    if let Some(p_hp) = full_rank_pinv(&sv(&block(&h_prime, k, l))) {
                        fam.lead_ah_fixed.at_most(p_lead, p_hp * p_akn, slack, || ctx(&format!("k={k} l={l}")));
                    }
                }
            }
        }
    }

    // leading blocks never have larger singular values
    let mut s = Seed::new(trial as u64).substream(9).sampler();
    for _ in 0..3 {
        let (k, l) = (1 + s.index(m), 1 + s.index(n));
        let sb = sv(&block(a, k, l));
        for (j, &b) in sb.iter().enumerate() {
            fam.submatrix.at_least(sa[j], b, norm_a, slack, || ctx(&format!("A_({k},{l}) j={}", j + 1)));
        }
    }

    if m >= n {
        let cols: Vec<Vec<f64>> = (1..=n).map(|c| sv(&block(a, m, c))).collect();
        for rr in 1..n {
            for l in 1..=n - rr {
                for k in 1..=rr {
                    let lhs = sigma(&cols[rr - 1], k);
                    let rhs = sigma(&cols[rr + l - 1], k + l);
                    fam.interlace.at_least(lhs, rhs, norm_a, slack, || ctx(&format!("r={rr} l={l} k={k}")));
                }
                if let (Some(p1), Some(p2)) = (full_rank_pinv(&cols[rr - 1]), full_rank_pinv(&cols[rr + l - 1])) {
                    fam.pinv_monotone.at_most(p1, p2, slack, || ctx(&format!("r={rr} l={l}")));
                }
            }
        }
    }
    Ok(())
}

fn check_perturbation(seed: Seed, max_size: usize, trial: usize, fam: &mut Families) -> Result<()> {
    let mut s = seed.substream(20).sampler();
    let n = 1 + s.index(max_size);
    let a = gaussian_matrix(seed.substream(21), n, n)?;
    let sa = sv(&a);
    if !(sa[n - 1] > FULL_RANK_RATIO * sa[0]) {
        return Ok(());
    }
    let a_inv = dense_inverse(&a)?;
    let e0 = gaussian_matrix(seed.substream(22), n, n)?;
    let target = 0.5 * (1.0 - s.index(1000) as f64 / 1000.0);
    let e = e0.scale(target / spectral_norm(&a_inv.mat_mul(&e0)?));
    let theta = spectral_norm(&a_inv.mat_mul(&e)?);
    let inv_norm = 1.0 / sa[n - 1];
    let perturbed = a.add(&e)?;
    let sp = sv(&perturbed);
    let ctx = || format!("trial {trial} (n={n}, ||A^-1 E||={theta:.3})");
    fam.perturbation.at_most(1.0 / sp[n - 1], inv_norm / (1.0 - theta), DEFAULT_SLACK, ctx);
    let change = spectral_norm(&dense_inverse(&perturbed)?.sub(&a_inv)?) / inv_norm;
    fam.perturbation_printed.at_most(change, inv_norm / (1.0 - theta), DEFAULT_SLACK, ctx);
    fam.perturbation_relative.at_most(change, theta / (1.0 - theta), DEFAULT_SLACK, ctx);
    Ok(())
}

/// Checks every inequality family on `trials` random instances with all
/// dimensions at most `max_size`.
pub fn check_spectral_bounds(seed: Seed, trials: usize, max_size: usize) -> Result<BoundReport> {
    if max_size == 0 || max_size > SPECTRAL_SIZE_CAP {
        return Err(Error::InvalidArgument(format!("sizes must lie in 1..={SPECTRAL_SIZE_CAP}, got {max_size}")));
    }
    let mut fam = Families::new();
    for t in 0..trials {
        let ts = seed.with_stream(t as u64);
        let shape = [Shape::Deficient, Shape::Tall, Shape::Wide][t % 3];
        let inst = draw_instance(ts, max_size, shape)?;
        check_instance(&inst, t, &mut fam)?;
        check_perturbation(ts, max_size, t, &mut fam)?;
    }
    Ok(BoundReport::new("spectral bounds", seed.master, trials, fam.into_vec()))
}

/// Only the inverse perturbation families.
pub fn check_perturbation_bound(seed: Seed, trials: usize, max_size: usize) -> Result<BoundReport> {
    if max_size == 0 || max_size > SPECTRAL_SIZE_CAP {
        return Err(Error::InvalidArgument(format!("sizes must lie in 1..={SPECTRAL_SIZE_CAP}, got {max_size}")));
    }
    let mut fam = Families::new();
    for t in 0..trials {
        check_perturbation(seed.with_stream(t as u64), max_size, t, &mut fam)?;
    }
    let families = vec![fam.perturbation, fam.perturbation_printed, fam.perturbation_relative];
    Ok(BoundReport::new("perturbation bound", seed.master, trials, families))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randgen::random_orthonormal;

    #[test]
    fn orthogonal_input_with_identity_multiplier_is_tight() {
        let q = random_orthonormal(Seed::new(1), 5).unwrap();
        let inst = Instance { a: q, f: RealMatrix::identity(5), h: RealMatrix::identity(5), rank: 5, shape: Shape::Tall };
        let mut fam = Families::new();
        check_instance(&inst, 0, &mut fam).unwrap();
        assert!(fam.eq_fa.passed() && fam.eq_ah.passed());
        assert!(fam.eq_fa.worst_excess.abs() < 1e-10, "{}", fam.eq_fa.worst_excess);
    }

    #[test]
    fn diagonal_by_hand() {
        let a = RealMatrix::diag(&[2.0, 1.0]);
        let inst = Instance { a, f: RealMatrix::identity(2), h: RealMatrix::identity(2), rank: 2, shape: Shape::Tall };
        let mut fam = Families::new();
        check_instance(&inst, 0, &mut fam).unwrap();
        assert!(fam.eq_ah.passed());
        assert!(fam.eq_ah.checks >= 3);
    }

    #[test]
    fn printed_leading_block_bound_fails_on_identity() {
        let inst = Instance {
            a: RealMatrix::identity(2),
            f: RealMatrix::from_rows(&[[1.0, 1.0]]),
            h: RealMatrix::from_rows(&[[1.0], [1.0]]),
            rank: 2,
            shape: Shape::Tall,
        };
        let mut fam = Families::new();
        check_instance(&inst, 0, &mut fam).unwrap();
        assert!(!fam.lead_fa.passed());
        assert!(fam.lead_fa_fixed.passed());
    }

    #[test]
    fn small_sweep_keeps_the_true_families() {
        let report = check_spectral_bounds(Seed::new(3), 30, 6).unwrap();
        for name in [
            "sigma_fa_lower_bound",
            "sigma_ah_lower_bound",
            "corollary_ii_pinv_ah",
            "corollary_iv_pinv_fa",
            "submatrix_sigma_dominance",
            "column_interlacing",
            "perturbed_inverse_norm",
            "leading_block_pinv_fa_block_svd",
            "leading_block_pinv_ah_block_svd",
        ] {
            let f = report.family(name).unwrap();
            assert!(f.passed(), "{name}: {:?}", f.examples);
            assert!(f.checks > 0, "{name} never ran");
        }
        assert!(check_spectral_bounds(Seed::new(3), 1, 64).is_err());
    }
}
