//! Acceptance checks on the full D <= 10^6 dataset of class numbers 1, 2, 3.
//! One PASS/FAIL line per criterion; exits non-zero if any check fails.
//!
//! The dataset is generated once and cached under the cargo target tmp dir.
//! Set QUADCLASS_LMFDB_CSV to an exported LMFDB CSV to run the full-data
//! frontier checks as well.

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use quadclass::arithmetic::{discriminant, is_squarefree, squarefree_sieve, FundamentalDiscriminant};
use quadclass::bubble::{
    cost, frontier_table, g_counts, search, value_distribution, ClassPair, ColumnStore, Cost, PureConstraint,
    SearchConfig, SearchMode, Triple,
};
use quadclass::classify::{
    ablation_table, evaluate, gbdt_train, parity_window, parse_features, permutation_importance, FeatureMatrix,
    GbdtConfig, ThresholdPredictor, ABLATION_ROWS,
};
use quadclass::dataset::{self, balanced_sample_13, generate, split, Dataset, GenerateConfig, Provenance};
use quadclass::genus::{parity_by_corollary, verify_dataset, Parity};
use quadclass::invariants::{class_number, l_one, regulator, ClassNumberEngine};
use quadclass::pca::{covariance, pca_fit, pca_fit_dataset, SymMatrix};

type Check = Result<(bool, String), Box<dyn std::error::Error>>;

const MAX_DISC: u64 = 1_000_000;
const SEED: u64 = 1;

fn full_dataset() -> Dataset {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-full-1e6");
    let wanted = Provenance::Generated {
        max_disc: MAX_DISC,
        classes: vec![1, 2, 3],
        bound: dataset::DEFAULT_BOUND,
    };
    if let Ok(ds) = dataset::load(&dir) {
        if *ds.provenance() == wanted {
            return ds;
        }
    }
    let t = Instant::now();
    let ds = generate(&GenerateConfig::new(MAX_DISC, [1, 2, 3])).expect("generation");
    println!("generated {} records in {:.1?}", ds.len(), t.elapsed());
    dataset::save(&ds, &dir).expect("cache write");
    ds
}

fn c1(full: &Dataset) -> Check {
    let class3 = full.filter_classes(&[3]);
    let small = class3.records().iter().filter(|r| r.disc <= 100_000).count();
    Ok((
        class3.len() == 11_531 && small == 1_261,
        format!("class 3 records {} (want 11531), D <= 10^5: {small} (want 1261)", class3.len()),
    ))
}

/// Smallest d by class number (rows) and (a3, a5, a7) (columns, a3 slowest);
/// 0 marks a vector that does not occur.
const TABLE1: [[u64; 27]; 3] = [
    [
        17, 77, 19, 5, 0, 0, 41, 14, 11, //
        3, 0, 57, 0, 0, 0, 6, 21, 141, //
        13, 7, 22, 0, 0, 0, 19, 301, 46,
    ],
    [
        122, 182, 218, 185, 35, 65, 26, 119, 74, //
        87, 42, 78, 285, 105, 15, 66, 609, 39, //
        178, 238, 58, 10, 70, 85, 34, 91, 106,
    ],
    [
        257, 2177, 473, 0, 0, 0, 761, 2429, 254, //
        993, 0, 1257, 0, 0, 0, 321, 0, 1101, //
        733, 7273, 142, 0, 0, 0, 229, 469, 316,
    ],
];

fn cell(v: [u8; 3]) -> usize {
    9 * v[0] as usize + 3 * v[1] as usize + v[2] as usize
}

fn a357(disc: &FundamentalDiscriminant) -> [u8; 3] {
    [3, 5, 7].map(|p| (1 + disc.chi(p)) as u8)
}

fn c2(full: &Dataset) -> Check {
    let mut minimal = [[None::<u64>; 27]; 3];
    // (D, d) of the field with the smallest discriminant, for diagnosis only.
    let mut minimal_disc = [[None::<(u64, u64)>; 27]; 3];
    for (r, a) in full.iter() {
        let (h, c) = (r.h as usize - 1, cell([a[2], a[4], a[6]]));
        if minimal[h][c].is_none() {
            minimal[h][c] = Some(r.d);
        }
        let slot = &mut minimal_disc[h][c];
        if slot.is_none_or(|(disc, _)| r.disc < disc) {
            *slot = Some((r.disc, r.d));
        }
    }
    // The dataset holds every d <= 250000; the remaining d <= 10^6 have
    // D = 4d > 10^6 and are checked directly against the absent cells.
    let absent: Vec<(usize, usize)> = (0..3)
        .flat_map(|h| (0..27).map(move |c| (h, c)))
        .filter(|&(h, c)| TABLE1[h][c] == 0)
        .collect();
    let absent_cells: HashSet<usize> = absent.iter().map(|&(_, c)| c).collect();
    let sf = squarefree_sieve(MAX_DISC);
    let candidates: Vec<FundamentalDiscriminant> = (MAX_DISC / 4 + 1..=MAX_DISC)
        .filter(|&d| sf[d as usize] && d % 4 != 1)
        .map(|d| discriminant(d).unwrap())
        .filter(|disc| absent_cells.contains(&cell(a357(disc))))
        .collect();
    let engine = ClassNumberEngine::new(4 * MAX_DISC);
    let extra: Vec<(u64, usize, usize)> = candidates
        .par_iter()
        .filter_map(|disc| {
            let h = engine.class_numbers(disc).h as usize;
            (1..=3).contains(&h).then(|| (disc.d(), h - 1, cell(a357(disc))))
        })
        .collect();

    let mut mismatches = Vec::new();
    let mut exact = 0;
    for h in 0..3 {
        for c in 0..27 {
            let want = TABLE1[h][c];
            let got = minimal[h][c];
            if want == 0 {
                continue;
            }
            match got {
                Some(d) if d == want => exact += 1,
                _ => mismatches.push(format!("h={} v=({},{},{}) table {want} found {got:?}", h + 1, c / 9, c / 3 % 3, c % 3)),
            }
        }
    }
    for &(h, c) in &absent {
        if let Some(d) = minimal[h][c] {
            mismatches.push(format!("h={} v=({},{},{}) table x found d={d}", h + 1, c / 9, c / 3 % 3, c % 3));
        }
    }
    for &(d, h, c) in &extra {
        if TABLE1[h][c] == 0 {
            mismatches.push(format!("h={} v=({},{},{}) table x found d={d}", h + 1, c / 9, c / 3 % 3, c % 3));
        }
    }
    let present = TABLE1.iter().flatten().filter(|&&v| v != 0).count();
    let by_disc = (0..3)
        .flat_map(|h| (0..27).map(move |c| (h, c)))
        .filter(|&(h, c)| TABLE1[h][c] != 0)
        .filter(|&(h, c)| minimal_disc[h][c].is_some_and(|(disc, d)| TABLE1[h][c] == d || TABLE1[h][c] == disc))
        .count();
    Ok((
        mismatches.is_empty(),
        format!(
            "{exact}/{present} cells exact, {} absent cells empty for d <= 10^6 ({} fields beyond the dataset checked); mismatches: {:?}; \
             {by_disc}/{present} entries match d or D of the smallest-D field instead",
            absent.len(),
            candidates.len(),
            mismatches
        ),
    ))
}

/// Bubble count of one class and the d at which its last new value appears.
fn saturation(ds: &Dataset, h: u32, triple: Triple) -> (usize, u64) {
    let mut seen = BTreeSet::new();
    let mut last = 0;
    for (r, a) in ds.iter().filter(|(r, _)| r.h == h) {
        if seen.insert(triple.map(|n| a[n - 1])) {
            last = r.d;
        }
    }
    (seen.len(), last)
}

fn c3(full: &Dataset) -> Check {
    let t = [3, 5, 7];
    let g = [1, 2, 3].map(|h| saturation(full, h, t));
    let g12 = g_counts(&value_distribution(full, ClassPair::new(1, 2)?, t)?);
    let g13 = g_counts(&value_distribution(full, ClassPair::new(1, 3)?, t)?);
    let pass = g == [(18, 301), (27, 609), (16, 7273)]
        && g12.g_ij == 18
        && g13.g_ij == 16
        && (g12.g_i, g12.g_j, g13.g_j) == (18, 27, 16);
    Ok((
        pass,
        format!(
            "g1 = {} (last new d {}), g2 = {} (last {}), g3 = {} (last {}), g12 = {}, g13 = {}",
            g[0].0, g[0].1, g[1].0, g[1].1, g[2].0, g[2].1, g12.g_ij, g13.g_ij
        ),
    ))
}

/// Printed (g1, g13, g3) of the best {1,3} triples.
const BEST13: [(u64, u64, u64); 15] = [
    (14, 10, 12),
    (18, 15, 21),
    (19, 15, 20),
    (18, 15, 21),
    (19, 15, 20),
    (17, 15, 22),
    (12, 10, 14),
    (14, 10, 12),
    (21, 15, 18),
    (12, 10, 14),
    (12, 10, 14),
    (19, 15, 20),
    (26, 20, 26),
    (20, 15, 19),
    (20, 15, 19),
];

fn c4() -> Check {
    let c = cost(18, 57, 18)?.to_f64();
    let five_thirds = Cost::Finite(num_rational::Ratio::new(5, 3));
    let mut bad = Vec::new();
    for &(g1, g13, g3) in &BEST13 {
        let c = cost(g1, g3, g13)?;
        if c != five_thirds {
            bad.push(format!("({g1},{g13},{g3}) -> {c}"));
        }
    }
    Ok((
        (c - 0.461538).abs() <= 1e-6 && bad.is_empty(),
        format!("cost(18,57,18) = {c:.9}; {}/15 rows give 5/3 {bad:?}", 15 - bad.len()),
    ))
}

fn c5(full: &Dataset) -> Check {
    let report = verify_dataset(full);
    let parity_ok = full
        .records()
        .par_iter()
        .filter(|r| parity_by_corollary(r.d).map(|p| p == Parity::of(r.h)).unwrap_or(false))
        .count();
    Ok((
        report.passed() && parity_ok == full.len(),
        format!(
            "{} records, {} violations, parity matches {parity_ok}/{}",
            report.records,
            report.violation_count,
            full.len()
        ),
    ))
}

fn c6() -> Check {
    let rows: Vec<(u64, bool, f64)> = (2..=10_000u64)
        .into_par_iter()
        .filter(|&d| is_squarefree(d))
        .map(|d| {
            let disc = discriminant(d).unwrap();
            let lhs = (disc.value() as f64).sqrt() * l_one(&disc);
            let r = regulator(d).unwrap();
            let (h, _) = class_number(d).unwrap();
            (d, (lhs / (2.0 * r)).round() as u32 == h, (lhs - 2.0 * r * h as f64).abs())
        })
        .collect();
    let rounded = rows.iter().filter(|r| r.1).count();
    let worst = rows.iter().filter(|r| r.0 <= 1000).map(|r| r.2).fold(0.0, f64::max);
    Ok((
        rounded == rows.len() && worst < 1e-4,
        format!("rounding exact on {rounded}/{} square-free d; max residual for d <= 1000: {worst:.2e}", rows.len()),
    ))
}

fn c7(full: &Dataset) -> Check {
    let d12 = full.filter_classes(&[1, 2]);
    let pred = ThresholdPredictor::f12();
    let eval = evaluate(&pred, &d12)?;
    let mut extreme = (0, 0);
    for (r, a) in d12.iter().filter(|(r, _)| r.n_d != 2) {
        extreme.1 += 1;
        extreme.0 += (pred.predict(r, a)? == r.h) as usize;
    }
    let window_ok = parity_window(2)
        && quadclass::arithmetic::primes_up_to(997)
            .into_iter()
            .filter(|&p| p > 2)
            .all(|p| parity_window(p) == (p % 4 == 3));
    let m = &eval.metrics;
    Ok((
        m.accuracy >= 0.97 && m.fn_ == 0 && extreme.0 == extreme.1 && window_ok,
        format!(
            "accuracy {:.4} on {} records, false negatives {}, n_d in {{1,3}}: {}/{}, window predicate {}",
            m.accuracy,
            m.total,
            m.fn_,
            extreme.0,
            extreme.1,
            if window_ok { "ok" } else { "wrong" }
        ),
    ))
}

fn c8(balanced: &Dataset) -> Check {
    let a = evaluate(&ThresholdPredictor::f13a(), balanced)?;
    let b = evaluate(&ThresholdPredictor::f13b(), balanced)?;
    for (name, e) in [("F13A", &a), ("F13B", &b)] {
        let shown: Vec<String> = e.misses.iter().take(8).map(|m| format!("d={} h={} s={:.3}", m.d, m.h, m.score)).collect();
        println!("  {name} misses {}: {}", e.misses.len(), shown.join(", "));
    }
    Ok((
        balanced.len() == 23_062 && a.metrics.accuracy >= 0.995 && b.metrics.accuracy >= 0.99,
        format!(
            "{} records; F13A accuracy {:.4}, F13B accuracy {:.4}",
            balanced.len(),
            a.metrics.accuracy,
            b.metrics.accuracy
        ),
    ))
}

fn c9(full: &Dataset, balanced: &Dataset) -> Check {
    let d12 = full.filter_classes(&[1, 2]);
    let (train, test) = split(&d12, 0.7, SEED)?;
    let features = parse_features("ap", d12.bound())?;
    let xt = FeatureMatrix::from_dataset(&train, &features)?;
    let xs = FeatureMatrix::from_dataset(&test, &features)?;
    // Shallow trees, many rounds: the {1,2} signal is close to additive.
    let config = GbdtConfig {
        trees: 1000,
        max_depth: 2,
        learning_rate: 0.5,
        seed: SEED,
        ..GbdtConfig::default()
    };
    let t = Instant::now();
    let model = gbdt_train(&xt, 1, 2, &config)?;
    let acc12 = model.accuracy(&xs)?;
    let importance = permutation_importance(&model, &xs, SEED, 3)?;
    let top3: Vec<&str> = importance.iter().take(3).map(|i| i.feature.as_str()).collect();
    let top_ok = top3.iter().all(|f| ["a2", "a3", "a5"].contains(f));
    println!("  h in {{1,2}}: trained in {:.1?}", t.elapsed());

    let t = Instant::now();
    let rows = ablation_table(balanced, &ABLATION_ROWS, 0.7, &GbdtConfig { seed: SEED, ..GbdtConfig::default() })?;
    println!("  ablation in {:.1?}", t.elapsed());
    let acc = |row: usize| rows[row - 1].accuracy;
    for r in &rows {
        println!("  row {:2} {:<12} {:.4}", r.row, r.features, r.accuracy);
    }
    let low = [1, 2, 3, 5, 8].map(acc);
    let mid = [4, 14].map(acc);
    let high = [6, 7, 9, 10, 11, 12, 13].map(acc);
    let max = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max);
    let min = |v: &[f64]| v.iter().copied().fold(f64::MAX, f64::min);
    let ordering = max(&low) < 0.65 && 0.65 < min(&mid) && max(&mid) < min(&high);
    Ok((
        acc12 >= 0.95 && top_ok && acc(1) <= 0.60 && acc(6) >= 0.98 && ordering,
        format!(
            "{{1,2}} ap accuracy {acc12:.4}, top-3 importance {top3:?}; {{1,3}} ap {:.4}, ap,D,R {:.4}; ablation ordering {}",
            acc(1),
            acc(6),
            if ordering { "holds" } else { "broken" }
        ),
    ))
}

fn c10(full: &Dataset) -> Check {
    let d12 = full.filter_classes(&[1, 2]);
    let pair = ClassPair::new(1, 2)?;
    let mut rng = dataset::rng(SEED);
    let triples: Vec<Triple> = (0..100)
        .map(|_| {
            let mut t: Vec<usize> = sample(&mut rng, 1000, 3).into_iter().map(|i| i + 1).collect();
            if rng.gen_bool(0.5) {
                t.reverse();
            }
            [t[0], t[1], t[2]]
        })
        .collect();
    let indices: Vec<usize> = triples.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let store = ColumnStore::new(&d12, pair, &indices)?;
    let mut agree = 0;
    for &t in &triples {
        let mut sets = [HashSet::new(), HashSet::new()];
        for (r, a) in d12.iter() {
            sets[(r.h - 1) as usize].insert(t.map(|n| a[n - 1]));
        }
        let naive = (sets[0].len() as u64, sets[1].len() as u64, sets[0].intersection(&sets[1]).count() as u64);
        let s = store.stats(t)?;
        agree += ((s.g_i, s.g_j, s.g_ij) == naive) as usize;
    }

    let config = SearchConfig {
        classes: pair,
        indices: (1..=50).collect(),
        mode: SearchMode::Exact { budget: None },
        top_k: 25,
    };
    let runs: Vec<_> = [1, 2, 4]
        .iter()
        .map(|&n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            pool.install(|| search(&d12, &config))
        })
        .collect::<Result<_, _>>()?;
    let deterministic = runs.windows(2).all(|w| w[0] == w[1]);

    let lmfdb = match std::env::var_os("QUADCLASS_LMFDB_CSV") {
        None => "LMFDB frontier checks skipped: QUADCLASS_LMFDB_CSV not set".to_string(),
        Some(path) => {
            let (ok, detail) = lmfdb_frontier(PathBuf::from(path))?;
            if !ok {
                return Ok((false, detail));
            }
            detail
        }
    };
    Ok((
        agree == 100 && deterministic,
        format!(
            "{agree}/100 random triples match the recount; exact 1..50 search identical on 1, 2, 4 threads ({} triples); {lmfdb}",
            runs[0].evaluated
        ),
    ))
}

fn lmfdb_frontier(path: PathBuf) -> Result<(bool, String), Box<dyn std::error::Error>> {
    let ds = dataset::import_csv(&path, dataset::DEFAULT_BOUND)?.filter_classes(&[1, 2]);
    let indices: Vec<usize> = (1..=ds.bound()).collect();
    let constraints: Vec<PureConstraint> = (0..=4).map(PureConstraint::Exactly).collect();
    let table = frontier_table(&ds, ClassPair::new(1, 2)?, &indices, &constraints)?;
    let values: Vec<Option<u64>> = table.iter().map(|f| f.max_pure_j).collect();
    let want: Vec<Option<u64>> = [109, 80, 60, 48, 33].into_iter().map(Some).collect();
    let one_red: Vec<(Triple, u64, u64, u64)> =
        table[1].witnesses.iter().map(|s| (s.triple, s.g_i, s.g_ij, s.g_j)).collect();
    let expected_one_red = vec![
        ([372, 931, 975], 83, 82, 162),
        ([585, 620, 931], 64, 63, 143),
        ([589, 637, 720], 48, 47, 127),
        ([637, 720, 989], 48, 47, 127),
        ([775, 819, 987], 84, 83, 163),
        ([804, 931, 975], 83, 82, 162),
    ];
    let three: Vec<Triple> = table[3].witnesses.iter().map(|s| s.triple).collect();
    let ok = values == want && one_red == expected_one_red && three == vec![[691, 693, 850]];
    Ok((ok, format!("LMFDB frontier {values:?}, one-red witnesses {one_red:?}, three-red witnesses {three:?}")))
}

/// Cyclic Jacobi rotations; eigenvalues descending with their eigenvectors.
fn jacobi(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    (0..n).for_each(|i| v[i * n + i] = 1.0);
    for _ in 0..100 {
        let off: f64 = (0..n * n).filter(|k| k / n != k % n).map(|k| a[k].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (x, y) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * x - s * y;
                    a[k * n + q] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * x - s * y;
                    a[q * n + k] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * x - s * y;
                    v[k * n + q] = s * x + c * y;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n).map(|j| (a[j * n + j], (0..n).map(|i| v[i * n + j]).collect())).collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    pairs.into_iter().unzip()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Worst orthonormality defect and eigen residual of `components` against `cov`.
fn pca_defects(components: &[Vec<f64>], eigenvalues: &[f64], cov: &SymMatrix<f64>) -> (f64, f64) {
    let mut ortho: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for (i, u) in components.iter().enumerate() {
        for (j, w) in components.iter().enumerate() {
            ortho = ortho.max((dot(u, w) - if i == j { 1.0 } else { 0.0 }).abs());
        }
        let cu = cov.mul_vec(u);
        let r = cu.iter().zip(u).map(|(x, y)| (x - eigenvalues[i] * y).powi(2)).sum::<f64>().sqrt();
        residual = residual.max(r);
    }
    (ortho, residual)
}

fn c11(full: &Dataset) -> Check {
    let mut ortho: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut jacobi_gap: f64 = 0.0;
    let mut rng = dataset::rng(SEED);
    for _ in 0..50 {
        let data: Vec<f64> = (0..200).map(|i| rng.gen_range(-1.0..1.0) * (1.0 + (i % 5) as f64)).collect();
        let m = pca_fit(&data, 40, 5, 5, Vec::new())?;
        let (_, cov) = covariance(&data, 40, 5)?;
        let (o, r) = pca_defects(&m.components, &m.eigenvalues, &cov);
        ortho = ortho.max(o);
        residual = residual.max(r);
        let (vals, vecs) = jacobi(&cov.values, 5);
        for i in 0..5 {
            jacobi_gap = jacobi_gap.max((vals[i] - m.eigenvalues[i]).abs());
            let sign = dot(&vecs[i], &m.components[i]).signum();
            for j in 0..5 {
                jacobi_gap = jacobi_gap.max((sign * vecs[i][j] - m.components[i][j]).abs());
            }
        }
    }

    let small = full.restrict_discriminant(100_000);
    let primes: Vec<usize> = quadclass::arithmetic::primes_up_to(1000).into_iter().map(|p| p as usize).collect();
    let model = pca_fit_dataset::<f64>(&small, &primes, 5)?;
    let dense: Vec<f64> = small.iter().flat_map(|(_, a)| primes.iter().map(move |&p| a[p - 1] as f64)).collect();
    let (_, cov) = covariance(&dense, small.len(), primes.len())?;
    let (o, r) = pca_defects(&model.components, &model.eigenvalues, &cov);
    ortho = ortho.max(o);
    residual = residual.max(r);

    // ln of the fundamental units 1+sqrt2, 2+sqrt3, (1+sqrt5)/2, 3+sqrt10.
    let oracles = [
        (2, 0.881_373_587_019_543),
        (3, 1.316_957_896_924_816_8),
        (5, 0.481_211_825_059_603_47),
        (10, 1.818_446_459_232_066_8),
    ];
    let mut rel: f64 = 0.0;
    for (d, want) in oracles {
        rel = rel.max((regulator(d)? - want).abs() / want);
    }
    Ok((
        ortho <= 1e-10 && residual <= 1e-8 && jacobi_gap <= 1e-8 && rel < 5e-11,
        format!(
            "orthonormality {ortho:.1e}, residual {residual:.1e}, Jacobi gap {jacobi_gap:.1e} (50 random 5x5 and a {}-feature dataset fit), regulator relative error {rel:.1e}",
            primes.len()
        ),
    ))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let full = full_dataset();
    let balanced = balanced_sample_13(&full, SEED).expect("balanced sample");
    let checks: Vec<(usize, Box<dyn Fn() -> Check + '_>)> = vec![
        (1, Box::new(|| c1(&full))),
        (2, Box::new(|| c2(&full))),
        (3, Box::new(|| c3(&full))),
        (4, Box::new(c4)),
        (5, Box::new(|| c5(&full))),
        (6, Box::new(c6)),
        (7, Box::new(|| c7(&full))),
        (8, Box::new(|| c8(&balanced))),
        (9, Box::new(|| c9(&full, &balanced))),
        (10, Box::new(|| c10(&full))),
        (11, Box::new(|| c11(&full))),
    ];
    let mut failed = 0;
    for (n, check) in checks {
        let t = Instant::now();
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += !pass as usize;
        println!(
            "criterion {n}: {} {detail} [{:.1?}]",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed()
        );
    }
    println!("acceptance: {} of 11 passed in {:.1?}", 11 - failed, started.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
