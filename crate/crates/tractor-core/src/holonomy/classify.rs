//! Classification of an estimated holonomy algebra: fixed vectors and
//! their norm signs, an invariant-subspace scan, and dimension matching
//! against the candidate lists, with commutant certificates for the
//! complex and quaternionic cases.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::MetricSpec;
use crate::linalg::{commutant, span_reduce};

use super::{AlgebraBasis, Bundle, HolonomyError};

/// A common kernel vector of the algebra with its norm under the
/// relevant inner product: sign −1 / 0 / +1 (null window 1e-7).
#[derive(Debug, Clone)]
pub struct FixedVector {
    pub v: DVector<f64>,
    pub norm: f64,
    pub sign: i8,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub label: String,
    /// "high", "medium", "low" or
    /// "dimension+irreducibility evidence only" (g2 / spin7).
    pub confidence: String,
    pub dim: usize,
    pub fixed_vectors: Vec<FixedVector>,
    /// Dimensions of the proper invariant subspaces found by the scan.
    pub invariant_ranks: Vec<usize>,
    pub evidence: Vec<String>,
}

fn superscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

struct Subspace {
    basis: Vec<DVector<f64>>,
    nondegenerate: bool,
}

/// Smallest invariant subspace containing `seed`: close the span under
/// the action of every basis element until the dimension stabilizes.
fn minimal_invariant(
    elements: &[DMatrix<f64>],
    seed: &DVector<f64>,
    tol: f64,
) -> Vec<DVector<f64>> {
    let mut cols = vec![seed.normalize()];
    loop {
        let mut rows = cols.clone();
        for b in elements {
            for c in &cols {
                rows.push(b * c);
            }
        }
        let red = span_reduce(&rows, tol);
        if red.dim == cols.len() {
            return cols;
        }
        cols = red.basis;
    }
}

/// Real seed vectors from the eigenstructure of a generic algebra element.
fn eigen_seeds(x: &DMatrix<f64>, size: usize) -> Vec<DVector<f64>> {
    let scale = x.amax().max(1e-12);
    let eigs = x.clone().complex_eigenvalues();
    let mut reps: Vec<Complex<f64>> = Vec::new();
    for lam in eigs.iter() {
        if lam.im < -1e-9 * scale {
            continue; // conjugate pair, same real subspace
        }
        if reps
            .iter()
            .all(|r| (r - lam).norm() > 1e-6 * (1.0 + scale))
        {
            reps.push(*lam);
        }
    }
    let xc = DMatrix::from_fn(size, size, |i, j| Complex::new(x[(i, j)], 0.0));
    let mut seeds = Vec::new();
    for lam in reps {
        let mut a = xc.clone();
        for d in 0..size {
            a[(d, d)] -= lam;
        }
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let mut arg = 0;
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s < svd.singular_values[arg] {
                arg = i;
            }
        }
        let re = DVector::from_fn(size, |i, _| vt[(arg, i)].re);
        let im = DVector::from_fn(size, |i, _| -vt[(arg, i)].im);
        if re.norm() > 1e-9 {
            seeds.push(re);
        }
        if im.norm() > 1e-9 {
            seeds.push(im);
        }
    }
    seeds
}

fn projector(cols: &[DVector<f64>], size: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(size, size);
    for c in cols {
        p += c * c.transpose();
    }
    p
}

/// Proper invariant subspaces reachable from fixed vectors and from the
/// eigenstructure of generic elements, deduplicated by projector.
fn invariant_subspaces(
    elements: &[DMatrix<f64>],
    size: usize,
    tol: f64,
    gram: &DMatrix<f64>,
    fixed: &[FixedVector],
) -> Vec<Subspace> {
    let mut seeds: Vec<DVector<f64>> = fixed.iter().map(|f| f.v.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(90125);
    for _ in 0..2 {
        let mut x = DMatrix::zeros(size, size);
        for b in elements {
            x += rng.random_range(-1.0..1.0) * b;
        }
        if x.amax() > 1e-12 {
            seeds.extend(eigen_seeds(&x, size));
        }
    }
    let mut found: Vec<Subspace> = Vec::new();
    for seed in seeds {
        if seed.norm() < 1e-12 {
            continue;
        }
        let w = minimal_invariant(elements, &seed, tol);
        if w.is_empty() || w.len() >= size {
            continue;
        }
        let p = projector(&w, size);
        if found
            .iter()
            .any(|s| (projector(&s.basis, size) - &p).amax() < 1e-6)
        {
            continue;
        }
        let k = w.len();
        let mut h = DMatrix::zeros(k, k);
        for (i, a) in w.iter().enumerate() {
            for (j, b) in w.iter().enumerate() {
                h[(i, j)] = (a.transpose() * gram * b)[(0, 0)];
            }
        }
        let sv = h.svd(false, false).singular_values;
        let nondegenerate = sv.iter().all(|s| *s > 1e-6);
        found.push(Subspace {
            basis: w,
            nondegenerate,
        });
    }
    found.sort_by_key(|s| s.basis.len());
    found
}

/// The invariant-subspace scan as used by the classifier, exposed for
/// block-structure reports: (orthonormal basis, nondegenerate under gram).
pub(crate) fn scan_invariant_subspaces(
    basis: &AlgebraBasis,
    gram: &DMatrix<f64>,
) -> Vec<(Vec<DVector<f64>>, bool)> {
    let fixed = basis.fixed_vectors(gram);
    invariant_subspaces(&basis.elements, basis.size, basis.tol, gram, &fixed)
        .into_iter()
        .map(|s| (s.basis, s.nondegenerate))
        .collect()
}

/// Dimension of the algebra restricted to an invariant block.
pub(crate) fn restricted_span_dim(basis: &AlgebraBasis, block: &[DVector<f64>]) -> usize {
    let restricted = restrict(&basis.elements, block);
    super::span_basis(&restricted, basis.bundle, block.len(), basis.tol, 0.0).dim
}

/// A complex structure inside the span of `commutant`: J with J² = −I,
/// exhibited from the skew part of a commutant element.
fn find_complex_structure(commutant: &[DMatrix<f64>], size: usize) -> Option<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2112);
    let mut candidates: Vec<DMatrix<f64>> = commutant.to_vec();
    for _ in 0..4 {
        let mut x = DMatrix::zeros(size, size);
        for c in commutant {
            x += rng.random_range(-1.0..1.0) * c;
        }
        candidates.push(x);
    }
    for c in candidates {
        let k = (&c - c.transpose()) * 0.5;
        let norm = k.norm();
        if norm < 1e-8 {
            continue;
        }
        let k2 = &k * &k;
        let mu2 = -k2.trace() / size as f64;
        if mu2 <= 0.0 {
            continue;
        }
        let mu = mu2.sqrt();
        let j = k / mu;
        if (&j * &j + DMatrix::<f64>::identity(size, size)).amax() < 1e-6 {
            return Some(j);
        }
    }
    None
}

/// Restrict each element to the span of the (Euclidean-orthonormal,
/// invariant) columns `w`: the matrix of the action in that basis.
fn restrict(elements: &[DMatrix<f64>], w: &[DVector<f64>]) -> Vec<DMatrix<f64>> {
    let k = w.len();
    elements
        .iter()
        .map(|b| {
            DMatrix::from_fn(k, k, |i, j| (w[i].transpose() * b * &w[j])[(0, 0)])
        })
        .collect()
}

/// Candidate subalgebras of so(m) acting irreducibly on ℝ^m, as
/// (label, dimension) with the certificate kind:
/// 0 = real, 1 = complex (su), 2 = quaternionic (sp), 3 = exceptional.
fn orthogonal_table(m: usize) -> Vec<(String, usize, u8)> {
    let mut t = vec![(format!("so({})", m), m * (m - 1) / 2, 0)];
    if m.is_multiple_of(2) {
        let h = m / 2;
        t.push((format!("su({})", h), h * h - 1, 1));
    }
    if m.is_multiple_of(4) {
        let q = m / 4;
        t.push((format!("sp({})", q), q * (2 * q + 1), 2));
    }
    if m == 7 {
        t.push(("g2".to_string(), 14, 3));
    }
    if m == 8 {
        t.push(("spin7".to_string(), 21, 3));
    }
    t
}

/// Match a bracket-closed algebra acting on ℝ^m (orthonormal basis, so the
/// inner product is the identity) against the irreducible candidates.
fn match_orthogonal(
    restricted: &[DMatrix<f64>],
    m: usize,
    dim: usize,
    tol: f64,
    evidence: &mut Vec<String>,
) -> Option<(String, String)> {
    // A skew subalgebra of full dimension is the whole of so(m); no Schur
    // certificate needed (and none exists for m = 2, where so(2) is of
    // complex type).
    if dim == m * (m - 1) / 2 {
        let skew = restricted
            .iter()
            .map(|e| (e + e.transpose()).amax())
            .fold(0.0f64, f64::max);
        if skew < 1e-6 {
            evidence.push(format!("skew and of full dimension dim so({m}) = {dim}"));
            return Some((format!("so({m})"), "high".to_string()));
        }
    }
    let scan = invariant_subspaces(restricted, m, tol, &DMatrix::identity(m, m), &[]);
    let irreducible = scan.is_empty();
    evidence.push(if irreducible {
        "acts irreducibly on the complementary block".to_string()
    } else {
        format!(
            "invariant blocks of dimension {:?} inside the complementary block",
            scan.iter().map(|s| s.basis.len()).collect::<Vec<_>>()
        )
    });
    if !irreducible {
        return None;
    }
    let comm = commutant(restricted, m, 1e-7);
    evidence.push(format!("commutant dimension {}", comm.len()));
    let j = find_complex_structure(&comm, m);
    if j.is_some() {
        evidence.push("invariant complex structure J with J² = −I".to_string());
    }
    let table = orthogonal_table(m);
    // Quaternionic certificate first: a four-dimensional commutant pins
    // sp even when the dimension also matches a complex candidate.
    if comm.len() >= 4 && j.is_some() {
        if let Some((label, _, _)) = table.iter().find(|(_, d, c)| *d == dim && *c == 2) {
            return Some((label.clone(), "high".to_string()));
        }
    }
    for (label, d, cert) in &table {
        if *d != dim {
            continue;
        }
        let ok = match cert {
            1 => comm.len() >= 2 && j.is_some(),
            2 => comm.len() >= 4 && j.is_some(),
            _ => comm.len() == 1,
        };
        if ok {
            let conf = if *cert == 3 {
                "dimension+irreducibility evidence only".to_string()
            } else {
                "high".to_string()
            };
            return Some((label.clone(), conf));
        }
    }
    // Fallback: dimension and a complex structure but an unexpected
    // commutant count.
    for (label, d, cert) in &table {
        if *d == dim && *cert != 0 && j.is_some() {
            return Some((label.clone(), "medium".to_string()));
        }
    }
    None
}

/// Classify an estimated algebra.  `gram` is the matrix of the bundle
/// inner product at the point the basis was computed at.
pub fn classify(basis: &AlgebraBasis, gram: &DMatrix<f64>) -> Classification {
    let size = basis.size;
    let dim = basis.dim;
    let tol = basis.tol;
    let mut evidence = vec![format!("algebra dimension {}", dim)];
    if basis.indeterminate {
        evidence.push("rank indeterminate: singular-value gap below 10²".to_string());
    }
    let base_conf = if basis.indeterminate { "low" } else { "high" };

    if dim == 0 {
        let label = match basis.bundle {
            Bundle::Tractor => "trivial (conformally flat)",
            Bundle::Metric => "trivial (flat)",
        };
        return Classification {
            label: label.to_string(),
            confidence: base_conf.to_string(),
            dim,
            fixed_vectors: Vec::new(),
            invariant_ranks: Vec::new(),
            evidence,
        };
    }

    let fixed = basis.fixed_vectors(gram);
    if !fixed.is_empty() {
        let signs: Vec<&str> = fixed
            .iter()
            .map(|f| match f.sign {
                -1 => "negative",
                0 => "null",
                _ => "positive",
            })
            .collect();
        evidence.push(format!(
            "fixed vectors: {} ({})",
            fixed.len(),
            signs.join(", ")
        ));
    } else {
        evidence.push("fixed vectors: none".to_string());
    }
    let subspaces = invariant_subspaces(&basis.elements, size, tol, gram, &fixed);
    let invariant_ranks: Vec<usize> = subspaces.iter().map(|s| s.basis.len()).collect();
    if !invariant_ranks.is_empty() {
        evidence.push(format!("invariant subspace ranks {:?}", invariant_ranks));
    }

    let (label, confidence) = match basis.bundle {
        Bundle::Tractor => {
            let n = size - 2;
            classify_tractor(basis, gram, n, &fixed, &subspaces, &mut evidence)
        }
        Bundle::Metric => classify_metric(basis, size, gram, &fixed, &subspaces, &mut evidence),
    };
    let confidence = if basis.indeterminate {
        "low".to_string()
    } else {
        confidence
    };
    Classification {
        label,
        confidence,
        dim,
        fixed_vectors: fixed,
        invariant_ranks,
        evidence,
    }
}

fn classify_tractor(
    basis: &AlgebraBasis,
    gram: &DMatrix<f64>,
    n: usize,
    fixed: &[FixedVector],
    subspaces: &[Subspace],
    evidence: &mut Vec<String>,
) -> (String, String) {
    let size = basis.size;
    let dim = basis.dim;
    let tol = basis.tol;
    if fixed.is_empty() {
        if subspaces.is_empty() {
            let expected = (n + 1) * (n + 2) / 2;
            evidence.push(format!("irreducible; dim so({},1) = {}", n + 1, expected));
            let conf = if dim == expected { "high" } else { "medium" };
            return (format!("full so({},1)", n + 1), conf.to_string());
        }
        if let Some(w) = subspaces.iter().find(|s| s.nondegenerate) {
            return decompose(basis, gram, w, evidence);
        }
        evidence.push("only degenerate invariant subspaces found".to_string());
        return ("unknown".to_string(), "low".to_string());
    }
    if fixed.len() == 1 {
        let f = &fixed[0];
        match f.sign {
            -1 => {
                // Positive-Einstein branch: restrict to the G-orthogonal
                // complement of the fixed vector, a positive-definite
                // (n+1)-dimensional block, and match the table.
                let gv = gram * &f.v;
                let gv_mat = &gv * gv.transpose();
                let comp = crate::linalg::common_kernel(&[gv_mat], size, 1e-9);
                let k = comp.len();
                let mut h = DMatrix::zeros(k, k);
                for (i, a) in comp.iter().enumerate() {
                    for (j, b) in comp.iter().enumerate() {
                        h[(i, j)] = (a.transpose() * gram * b)[(0, 0)];
                    }
                }
                let chol = match h.cholesky() {
                    Some(c) => c,
                    None => {
                        evidence.push(
                            "complement of the negative vector is not positive definite"
                                .to_string(),
                        );
                        return ("unknown".to_string(), "low".to_string());
                    }
                };
                // Columns q_j = Σ_i comp_i (L⁻ᵀ)_ij are G-orthonormal.
                let linv_t = chol
                    .l()
                    .transpose()
                    .try_inverse()
                    .expect("Cholesky factor is invertible");
                let q: Vec<DVector<f64>> = (0..k)
                    .map(|j| {
                        let mut v = DVector::zeros(size);
                        for (i, c) in comp.iter().enumerate() {
                            v += linv_t[(i, j)] * c;
                        }
                        v
                    })
                    .collect();
                let restricted: Vec<DMatrix<f64>> = basis
                    .elements
                    .iter()
                    .map(|b| {
                        DMatrix::from_fn(k, k, |r, c| {
                            (q[r].transpose() * gram * b * &q[c])[(0, 0)]
                        })
                    })
                    .collect();
                if let Some((label, conf)) =
                    match_orthogonal(&restricted, k, dim, tol, evidence)
                {
                    return (label, conf);
                }
                ("unknown".to_string(), "low".to_string())
            }
            0 => classify_null_branch(basis, n, evidence),
            _ => {
                let expected = n * (n + 1) / 2;
                evidence.push(format!("dim so({},1) = {}", n, expected));
                let conf = if dim == expected { "high" } else { "medium" };
                (format!("so({},1)", n), conf.to_string())
            }
        }
    } else {
        if let Some(w) = subspaces.iter().find(|s| s.nondegenerate) {
            return decompose(basis, gram, w, evidence);
        }
        evidence.push("multiple fixed vectors without a usable splitting".to_string());
        ("unknown".to_string(), "low".to_string())
    }
}

/// Ricci-flat branch: a null fixed vector, dim h + n total, with the
/// 𝔠𝔬-block projection supplying dim h.
fn classify_null_branch(
    basis: &AlgebraBasis,
    n: usize,
    evidence: &mut Vec<String>,
) -> (String, String) {
    let dim = basis.dim;
    let co_rows: Vec<DVector<f64>> = basis
        .elements
        .iter()
        .map(|b| super::vectorize(&super::co_block(b, n)))
        .filter(|v| v.norm() > 1e-9)
        .map(|v| v.normalize())
        .collect();
    let co_dim = span_reduce(&co_rows, basis.tol).dim;
    evidence.push(format!("co-block projection dimension {}", co_dim));
    if dim < n {
        evidence.push(format!("dimension {} below the translation rank {}", dim, n));
        return ("unknown".to_string(), "low".to_string());
    }
    let hdim = dim - n;
    if co_dim != hdim {
        evidence.push(format!(
            "co-block dimension {} does not match dim − n = {}",
            co_dim, hdim
        ));
        return ("unknown".to_string(), "low".to_string());
    }
    for (label, d, cert) in orthogonal_table(n) {
        if d == hdim {
            let conf = if cert == 3 {
                "dimension+irreducibility evidence only"
            } else {
                "high"
            };
            return (
                format!("{}⋉ℝ{}", label, superscript(n)),
                conf.to_string(),
            );
        }
    }
    ("unknown".to_string(), "low".to_string())
}

fn classify_metric(
    basis: &AlgebraBasis,
    n: usize,
    gram: &DMatrix<f64>,
    fixed: &[FixedVector],
    subspaces: &[Subspace],
    evidence: &mut Vec<String>,
) -> (String, String) {
    let dim = basis.dim;
    if !fixed.is_empty() {
        evidence.push("parallel vector field present: reducible metric holonomy".to_string());
        if let Some(w) = subspaces.iter().find(|s| s.nondegenerate) {
            return decompose(basis, gram, w, evidence);
        }
        return ("unknown".to_string(), "low".to_string());
    }
    // Move to a g-orthonormal frame so that transposes are adjoints and
    // the commutant certificates see honest so(n) matrices.
    let Some(chol) = gram.clone().cholesky() else {
        evidence.push("metric inner product is not positive definite".to_string());
        return ("unknown".to_string(), "low".to_string());
    };
    let lt = chol.l().transpose();
    let lt_inv = lt
        .clone()
        .try_inverse()
        .expect("Cholesky factor is invertible");
    let elements: Vec<DMatrix<f64>> =
        basis.elements.iter().map(|b| &lt * b * &lt_inv).collect();
    if let Some((label, conf)) = match_orthogonal(&elements, n, dim, basis.tol, evidence) {
        return (label, conf);
    }
    if let Some(w) = subspaces.iter().find(|s| s.nondegenerate) {
        return decompose(basis, gram, w, evidence);
    }
    ("unknown".to_string(), "low".to_string())
}

/// Decomposable branch: classify the two blocks of a non-degenerate
/// invariant splitting and join the labels.
fn decompose(
    basis: &AlgebraBasis,
    gram: &DMatrix<f64>,
    w: &Subspace,
    evidence: &mut Vec<String>,
) -> (String, String) {
    let size = basis.size;
    evidence.push(format!(
        "non-degenerate invariant subspace of dimension {}",
        w.basis.len()
    ));
    // G-orthogonal complement of the invariant block.
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for b in &w.basis {
        rows.push((gram * b).normalize());
    }
    let g_rows = span_reduce(&rows, 1e-9);
    let mut comp_mat = DMatrix::zeros(size, size);
    for v in &g_rows.basis {
        comp_mat += v * v.transpose();
    }
    let comp = crate::linalg::common_kernel(&[comp_mat], size, 1e-9);
    let mut labels = Vec::new();
    for block in [&w.basis, &comp] {
        if block.is_empty() {
            labels.push("trivial".to_string());
            continue;
        }
        let restricted = restrict(&basis.elements, block);
        let sub = super::span_basis(&restricted, basis.bundle, block.len(), basis.tol, 0.0);
        if sub.dim == 0 {
            labels.push("trivial".to_string());
        } else {
            let mut subgram = DMatrix::zeros(block.len(), block.len());
            for (i, a) in block.iter().enumerate() {
                for (j, b) in block.iter().enumerate() {
                    subgram[(i, j)] = (a.transpose() * gram * b)[(0, 0)];
                }
            }
            labels.push(classify(&sub, &subgram).label);
        }
    }
    (
        format!("decomposable({} ⊕ {})", labels[0], labels[1]),
        "medium".to_string(),
    )
}

/// Classify with the inner product taken from the metric at its base
/// point (the Gram matrix of the tractor metric, or the metric itself).
pub fn classify_at(
    m: &MetricSpec,
    basis: &AlgebraBasis,
) -> Result<Classification, HolonomyError> {
    let g = m.metric_at(m.basepoint())?;
    let gram = match basis.bundle {
        Bundle::Tractor => crate::tractor::gram(&g),
        Bundle::Metric => g,
    };
    Ok(classify(basis, &gram))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use crate::holonomy::{infinitesimal_algebra, metric_algebra};

    #[test]
    fn conformally_flat_metrics_classify_as_trivial() {
        for m in [
            catalogue::flat(4),
            catalogue::sphere(4, 1.0),
            catalogue::hyperbolic(4, -1.0),
        ] {
            let basis = infinitesimal_algebra(&m, m.basepoint(), 1, 1e-7).unwrap();
            let c = classify_at(&m, &basis).unwrap();
            assert_eq!(c.label, "trivial (conformally flat)", "{}", m.label());
            assert_eq!(c.confidence, "high");
        }
    }

    #[test]
    fn sphere_metric_holonomy_is_full_rotation_algebra() {
        let m = catalogue::sphere(4, 1.0);
        let basis = metric_algebra(&m, m.basepoint(), 1, 1e-7).unwrap();
        let c = classify_at(&m, &basis).unwrap();
        assert_eq!(c.label, "so(4)");
        assert_eq!(c.confidence, "high");
    }

    #[test]
    fn s3xs3_is_so7_with_a_negative_fixed_vector() {
        let m = catalogue::lookup("s3xs3").unwrap();
        let basis = infinitesimal_algebra(&m, m.basepoint(), 2, 1e-7).unwrap();
        let c = classify_at(&m, &basis).unwrap();
        assert_eq!(c.label, "so(7)");
        assert_eq!(c.dim, 21);
        assert_eq!(c.fixed_vectors.len(), 1);
        assert_eq!(c.fixed_vectors[0].sign, -1);
        assert_eq!(c.confidence, "high");
        // Fixed vectors are honestly fixed.
        let v = &c.fixed_vectors[0].v;
        for b in &basis.elements {
            assert!((b * v).norm() <= 1e-7 * b.norm() * v.norm());
        }
    }

    #[test]
    fn unbalanced_product_is_full() {
        let m = catalogue::lookup("s2xs2r2").unwrap();
        let basis = infinitesimal_algebra(&m, m.basepoint(), 2, 1e-7).unwrap();
        let c = classify_at(&m, &basis).unwrap();
        assert_eq!(c.label, "full so(5,1)");
        assert_eq!(c.dim, 15);
        assert!(c.fixed_vectors.is_empty());
    }

    #[test]
    fn eguchi_hanson_labels() {
        let m = catalogue::lookup("eguchi-hanson").unwrap();
        let metric = metric_algebra(&m, m.basepoint(), 2, 1e-7).unwrap();
        let cm = classify_at(&m, &metric).unwrap();
        assert_eq!(cm.label, "sp(1)");
        let tractor = infinitesimal_algebra(&m, m.basepoint(), 2, 1e-7).unwrap();
        let ct = classify_at(&m, &tractor).unwrap();
        assert_eq!(ct.label, "su(2)⋉ℝ⁴");
        assert_eq!(ct.dim, 7);
        assert_eq!(ct.fixed_vectors.len(), 1);
        assert_eq!(ct.fixed_vectors[0].sign, 0);
    }

    #[test]
    fn classification_is_invariant_under_rescaling() {
        use crate::expr::Expression;
        let m = catalogue::lookup("s3xs3").unwrap();
        let coords = m.coord_refs();
        let f = Expression::parse("0.1*sin(theta1) + 0.05*phi", &coords).unwrap();
        let (mh, _) = m.rescale(f).unwrap();
        let a = infinitesimal_algebra(&m, m.basepoint(), 2, 1e-7).unwrap();
        let b = infinitesimal_algebra(&mh, mh.basepoint(), 2, 1e-7).unwrap();
        assert_eq!(a.dim, b.dim);
        let ca = classify_at(&m, &a).unwrap();
        let cb = classify_at(&mh, &b).unwrap();
        assert_eq!(ca.label, cb.label);
    }

    #[test]
    fn superscripts_render() {
        assert_eq!(superscript(4), "⁴");
        assert_eq!(superscript(12), "¹²");
    }
}
