//! End-to-end checks that tie the sampler, census, statistics, volume, and
//! stable-graph layers to independently computed references. [run_all] powers
//! the `ribbonlab verify` subcommand; each check reports one pass/fail line.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cycles::spectrum_counts;
use crate::halfedge::HalfEdgeStructure;
use crate::numeric::chi_square_sf;
use crate::poisson::{expected_count, IntensityParams, IntervalSpec};
use crate::run::{build_report, run_trials, saddle_ratio_rows, volume_ratio_rows,
    write_sample_jsonl, RunConfig};
use crate::sampler::{sample_map, SamplerConfig};
use crate::stablegraph::{enumerate_stable_graphs, lemma_k_sum, lemma_kk_check};
use crate::stats::{empirical_factorial_moment, HistogramAccumulator, MomentReport};
use crate::volumes::{exact_volume_g1, exact_volume_genus0};

/// Outcome of one acceptance check.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs every acceptance check in order. Deterministic; heavy sampling runs
/// are shared between checks. Panics on infrastructure errors (IO, invalid
/// configs), which are themselves failures.
pub fn run_all() -> Vec<CriterionResult> {
    let mut out = Vec::new();

    // three fixed genus-64 runs shared by the histogram and girth checks
    let mut runs64 = Vec::new();
    for seed in [1u64, 2, 3] {
        let cfg = RunConfig::new(64, seed);
        let t = Instant::now();
        let records = run_trials(&cfg).unwrap();
        let report = build_report(&cfg, &records).unwrap();
        runs64.push((cfg, report, t.elapsed().as_secs_f64()));
    }

    out.push(intensity_histogram(&runs64[0]));
    out.push(girth_law(&runs64));
    out.push(factorial_moments());
    out.push(sampler_law());
    out.push(exact_volumes());
    out.push(saddle_convergence());
    out.push(volume_asymptotics());
    out.push(composition_sums());
    out.push(separating_bound());
    out.push(class_counts());
    out.push(determinism());

    for (i, r) in out.iter().enumerate() {
        assert_eq!(r.index, i + 1);
    }
    out
}

fn result(index: usize, name: &'static str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult { index, name, passed, detail }
}

/// Genus-64 histogram of cycle lengths against the limiting intensity:
/// at least 90% of the bins left of 2.5 within 3 Poisson standard errors.
fn intensity_histogram(
    run: &(RunConfig, (crate::run::Report, HistogramAccumulator), f64),
) -> CriterionResult {
    let (cfg, (_, hist), elapsed) = run;
    let params = IntensityParams::new(cfg.mu());
    let trials = hist.trials() as f64;
    let width = hist.bin_width();
    let mut ok = 0usize;
    let mut total = 0usize;
    let mut worst = 0.0f64;
    for (i, &count) in hist.counts().iter().enumerate() {
        let (a, b) = hist.bin_edges(i);
        if a >= 2.5 {
            continue;
        }
        total += 1;
        let mean = expected_count(a, b, &params) * trials;
        let z = (count as f64 - mean) / mean.sqrt();
        if z.abs() <= 3.0 {
            ok += 1;
        }
        if z.abs() > worst.abs() {
            worst = z;
        }
    }
    let need = (9 * total).div_ceil(10);
    let passed = ok >= need && *elapsed <= 900.0;
    let detail = format!(
        "genus 64, 10^3 trials, seed 1, bins of width {width}: {ok}/{total} bins left of 2.5 \
         within 3 Poisson se (need {need}); worst z {worst:+.2}; run took {elapsed:.1}s \
         (budget 900s)"
    );
    result(1, "intensity histogram", passed, detail)
}

/// Exact girths against the limiting law: KS p >= 0.01 on at least two of
/// the three fixed seeds.
fn girth_law(
    runs: &[(RunConfig, (crate::run::Report, HistogramAccumulator), f64)],
) -> CriterionResult {
    let mut hits = 0usize;
    let mut detail = String::from("genus 64 girth KS vs limit law:");
    for (cfg, (report, _), _) in runs {
        let ks = &report.girth_ks;
        if ks.p >= 0.01 {
            hits += 1;
        }
        write!(detail, " seed {}: stat {:.4} p {:.4};", cfg.seed, ks.stat, ks.p).unwrap();
    }
    write!(detail, " {hits}/3 seeds with p >= 0.01 (need 2)").unwrap();
    result(2, "girth law", hits >= 2, detail)
}

fn moment_battery(genus: u32, trials: u64, seed: u64) -> Vec<MomentReport> {
    let mut cfg = RunConfig::new(genus, seed);
    cfg.trials = trials;
    let records = run_trials(&cfg).unwrap();
    let params = IntensityParams::new(cfg.mu());
    let pairs = [(0.0, 1.0), (1.0, 2.0)];
    let counts: Vec<Vec<u64>> =
        records.iter().map(|r| spectrum_counts(&r.spectrum(), &pairs).unwrap()).collect();
    let single: Vec<Vec<u64>> = counts.iter().map(|c| vec![c[0]]).collect();
    let unit = |a: f64, r: u32| IntervalSpec { a, b: a + 1.0, r };
    vec![
        empirical_factorial_moment(&single, &[unit(0.0, 1)], &params).unwrap(),
        empirical_factorial_moment(&single, &[unit(0.0, 2)], &params).unwrap(),
        empirical_factorial_moment(&counts, &[unit(0.0, 1), unit(1.0, 1)], &params).unwrap(),
    ]
}

/// Factorial moments of interval counts at genus 32 within 3 standard errors
/// of the limiting Poisson products, with the genus-8 bias recorded and
/// required to shrink. Seed 3 is fixed; the finite-genus bias of the joint
/// moment sits near 3 standard errors at 10^4 trials, so the z-check is tight.
fn factorial_moments() -> CriterionResult {
    let g8 = moment_battery(8, 10_000, 3);
    let g32 = moment_battery(32, 10_000, 3);
    let names = ["count[0,1)", "pairs[0,1)", "joint[0,1)x[1,2)"];
    let mut passed = true;
    let mut detail = String::from("10^4 trials, seed 3:");
    for ((name, a), b) in names.iter().zip(&g8).zip(&g32) {
        let (bias8, bias32) = (a.empirical - a.predicted, b.empirical - b.predicted);
        if b.z.abs() > 3.0 || bias32.abs() >= bias8.abs() {
            passed = false;
        }
        write!(
            detail,
            " {name}: g32 emp {:.4} pred {:.4} z {:+.2}, bias {:+.4} -> {:+.4};",
            b.empirical, b.predicted, b.z, bias8, bias32
        )
        .unwrap();
    }
    detail.push_str(" need |z| <= 3 at g=32 and shrinking |bias|");
    result(3, "factorial moments", passed, detail)
}

/// All fixed-point-free involutions on 0..h whose vertex rotation
/// sigma(x) = partner(x)+1 mod h is trivalent; each one is a one-faced
/// trivalent map labeled along its face tour.
fn enumerate_matchings(h: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(partner: &mut [usize], visit: &mut impl FnMut(&[usize])) {
        let h = partner.len();
        let Some(i) = partner.iter().position(|&p| p == usize::MAX) else {
            let mut seen = vec![false; h];
            for start in 0..h {
                if seen[start] {
                    continue;
                }
                let mut x = start;
                let mut n = 0;
                while !seen[x] {
                    seen[x] = true;
                    x = (partner[x] + 1) % h;
                    n += 1;
                }
                if n != 3 {
                    return;
                }
            }
            visit(partner);
            return;
        };
        for j in i + 1..h {
            if partner[j] == usize::MAX {
                partner[i] = j;
                partner[j] = i;
                rec(partner, visit);
                partner[i] = usize::MAX;
                partner[j] = usize::MAX;
            }
        }
    }
    let mut partner = vec![usize::MAX; h];
    rec(&mut partner, visit);
}

/// Face-tour word of a one-faced map, minimized over rotations: position j
/// holds the tour position of the partner of the half-edge at tour position
/// j, relabeled so the word is the lexicographic minimum over starting
/// points. Equal words exactly characterize isomorphic rooted-tour classes.
pub fn canonical_face_word(graph: &HalfEdgeStructure) -> Vec<usize> {
    assert_eq!(graph.face_count(), 1, "face word needs a one-faced map");
    let (sigma, alpha) = (graph.sigma(), graph.alpha());
    let h = sigma.len();
    let mut pos = vec![usize::MAX; h];
    let mut order = Vec::with_capacity(h);
    let mut x = 0;
    for k in 0..h {
        pos[x] = k;
        order.push(x);
        x = sigma[alpha[x]];
    }
    let word: Vec<usize> = (0..h).map(|j| pos[alpha[order[j]]]).collect();
    let mut best: Option<Vec<usize>> = None;
    for s in 0..h {
        let cand: Vec<usize> = (0..h).map(|j| (word[(j + s) % h] + h - s) % h).collect();
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    best.unwrap()
}

/// Brute-force law of uniform rooted one-faced trivalent maps of the given
/// genus: canonical face word of each isomorphism class mapped to how many
/// rooted maps (labeled matchings) it contains.
pub fn enumerate_rooted_maps(genus: u32) -> BTreeMap<Vec<usize>, u64> {
    let h = 12 * genus as usize - 6;
    let mut classes: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    enumerate_matchings(h, &mut |partner| {
        let sigma: Vec<usize> = (0..h).map(|x| (partner[x] + 1) % h).collect();
        let graph = HalfEdgeStructure::build(sigma, partner.to_vec()).unwrap();
        assert_eq!(graph.genus(), Ok(genus as usize));
        *classes.entry(canonical_face_word(&graph)).or_default() += 1;
    });
    classes
}

fn law_test(genus: u32, trials: u64) -> (f64, usize, f64) {
    let classes = enumerate_rooted_maps(genus);
    let total: u64 = classes.values().sum();
    let mut observed: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for t in 0..trials {
        let cfg = SamplerConfig::new(genus, 9).with_trial(t);
        let map = sample_map(&cfg).unwrap().map;
        let word = canonical_face_word(map.graph());
        assert!(classes.contains_key(&word), "sampled map outside the enumerated law");
        *observed.entry(word).or_default() += 1;
    }
    if classes.len() == 1 {
        assert_eq!(observed.values().sum::<u64>(), trials);
        return (0.0, 0, 1.0);
    }
    let mut stat = 0.0;
    for (word, mult) in &classes {
        let expected = trials as f64 * *mult as f64 / total as f64;
        let obs = observed.get(word).copied().unwrap_or(0) as f64;
        stat += (obs - expected).powi(2) / expected;
    }
    let dof = classes.len() - 1;
    (stat, dof, chi_square_sf(stat, dof as u32))
}

/// Sampler law at genus 1 and 2 against exhaustive rooted-map enumeration:
/// chi-square p >= 0.01 with 10^5 samples per genus. Structural assertions
/// (trivalent, one face, genus) run inside every sample.
fn sampler_law() -> CriterionResult {
    let trials = 100_000;
    let (_, _, p1) = law_test(1, trials);
    let (stat2, dof2, p2) = law_test(2, trials);
    let passed = p1 >= 0.01 && p2 >= 0.01;
    let detail = format!(
        "10^5 samples per genus; genus 1: single class, all samples in it (p = {p1}); \
         genus 2: chi-square {stat2:.2} on {dof2} dof, p = {p2:.4}; need p >= 0.01"
    );
    result(4, "sampler law", passed, detail)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_pow(x: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

fn rat_factorial(k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for i in 2..=k {
        acc *= BigRational::from_integer(BigInt::from(i));
    }
    acc
}

fn rational_genus0(l: &[BigRational]) -> BigRational {
    fn rec(remaining: usize, slot: usize, d: &mut [usize], l: &[BigRational], sum: &mut BigRational) {
        if slot + 1 == d.len() {
            d[slot] = remaining;
            let m: usize = d.iter().sum();
            let mut term = rat_factorial(m);
            for (i, &di) in d.iter().enumerate() {
                term *= rat_pow(&l[i], 2 * di);
                term /= rat_pow(&rat(2, 1), di) * rat_factorial(di) * rat_factorial(di);
            }
            *sum += term;
            return;
        }
        for v in 0..=remaining {
            d[slot] = v;
            rec(remaining - v, slot + 1, d, l, sum);
        }
    }
    let n = l.len();
    let mut sum = BigRational::zero();
    rec(n - 3, 0, &mut vec![0usize; n], l, &mut sum);
    sum
}

/// Exact volume identities in rational arithmetic: the one-boundary genus-1
/// volume L^2/48 from both the closed form and the intersection-number sum,
/// the genus-0 volumes against a multinomial oracle for n <= 6, and exact
/// homogeneity V(cL) = c^(6g-6+2n) V(L) for these families.
fn exact_volumes() -> CriterionResult {
    let mut passed = true;
    let mut detail = String::new();

    // genus 1, one boundary: closed form L^2 / (1! 24 2^1 1!) and the
    // intersection sum <tau_1> L^2 / (2^1 1!) with <tau_1> = 1/24
    let l = rat(7, 3);
    let closed = rat_pow(&l, 2) / (rat_factorial(1) * rat(24, 1) * rat(2, 1) * rat_factorial(1));
    let tau1 = rat(1, 24);
    let inter = &tau1 * rat_pow(&l, 2) / (rat(2, 1) * rat_factorial(1));
    let target = rat_pow(&l, 2) / rat(48, 1);
    passed &= closed == target && inter == target;
    write!(detail, "one-boundary genus 1 at L = 7/3: both routes equal L^2/48: {};", closed == target && inter == target).unwrap();

    // scaled-arithmetic implementation agrees with the rational value
    let impl_v = exact_volume_g1(1, 7.0 / 3.0).as_f64();
    let impl_ok = (impl_v - target.to_f64().unwrap()).abs() <= 1e-13 * impl_v.abs();
    passed &= impl_ok;

    // genus 0 with rational boundary tuples against the multinomial oracle
    let bases = [rat(1, 1), rat(2, 1), rat(1, 2), rat(3, 2), rat(3, 1), rat(5, 4)];
    let mut hom_ok = true;
    let mut float_ok = true;
    for n in 3..=6usize {
        let tuple: Vec<BigRational> = bases[..n].to_vec();
        let exact = rational_genus0(&tuple);
        let c = rat(7, 3);
        let scaled: Vec<BigRational> = tuple.iter().map(|x| x * &c).collect();
        hom_ok &= rational_genus0(&scaled) == rat_pow(&c, 2 * n - 6) * &exact;
        let floats: Vec<f64> = tuple.iter().map(|x| x.to_f64().unwrap()).collect();
        let v = exact_volume_genus0(&floats).as_f64();
        float_ok &= (v - exact.to_f64().unwrap()).abs() <= 1e-12 * v.abs();
    }
    // one-boundary genus-1 homogeneity, exact: V(cL) = c^2 V(L)
    let c = rat(7, 3);
    let hom_g1 = rat_pow(&(&l * &c), 2) / rat(48, 1) == rat_pow(&c, 2) * &target;
    passed &= hom_ok && float_ok && hom_g1;
    write!(
        detail,
        " genus-0 n=3..6 oracle match (rel 1e-12): {float_ok}; exact homogeneity: {};",
        hom_ok && hom_g1
    )
    .unwrap();
    write!(detail, " implementation matches rationals: {impl_ok}").unwrap();
    result(5, "exact volumes", passed, detail)
}

/// Saddle-point estimate of the one-boundary series coefficient: the gap
/// |ratio - 1| strictly shrinks along g = 16, 32, 64, 128 and ends below 0.2.
fn saddle_convergence() -> CriterionResult {
    let rows = saddle_ratio_rows(128);
    let mut passed = !rows.is_empty();
    let mut prev = f64::INFINITY;
    let mut detail = String::from("|ratio - 1| at g = 16, 32, 64, 128:");
    for (g, _, _, ratio) in &rows {
        let gap = (ratio - 1.0).abs();
        if gap >= prev {
            passed = false;
        }
        prev = gap;
        write!(detail, " g={g}: {gap:.5};").unwrap();
    }
    let last = (rows.last().unwrap().3 - 1.0).abs();
    passed &= rows.last().unwrap().0 == 128 && last < 0.2;
    write!(detail, " strictly decreasing, final < 0.2: {passed}").unwrap();
    result(6, "saddle-point convergence", passed, detail)
}

/// One-boundary volume against its large-genus series form. The two agree
/// identically — (6g-3)! = (6g-3)!! 2^(3g-2) (3g-2)! collapses the series
/// form to the closed form — so the check proves that identity exactly per
/// genus and requires the floating-point ratios to sit at 1 up to roundoff;
/// a strictly shrinking gap is vacuous for an identically-zero error.
fn volume_asymptotics() -> CriterionResult {
    let mut passed = true;
    let mut detail = String::from("exact/series ratio:");
    let mut identity = true;
    for g in [8usize, 16, 32, 64, 128] {
        let lhs: BigInt = (2..=(6 * g - 3)).map(BigInt::from).product();
        let odd: BigInt = (1..=(6 * g - 3)).step_by(2).map(BigInt::from).product();
        let pow2 = rat_pow(&rat(2, 1), 3 * g - 2);
        let rhs = BigRational::from_integer(odd) * pow2 * rat_factorial(3 * g - 2);
        identity &= BigRational::from_integer(lhs) == rhs;
    }
    passed &= identity;
    let rows = volume_ratio_rows(128);
    for (g, _, _, ratio) in &rows {
        let gap = (ratio - 1.0).abs();
        passed &= gap < 0.2;
        write!(detail, " g={g}: {ratio:.15};").unwrap();
    }
    passed &= rows.last().map(|r| r.0) == Some(128);
    write!(detail, " factorial identity exact at every g: {identity}").unwrap();
    result(7, "volume asymptotics", passed, detail)
}

/// Composition-sum bound F(n,k) <= 4/n in exact rational arithmetic for all
/// 2 <= k <= n <= 40, with the tightest slack logged.
fn composition_sums() -> CriterionResult {
    let mut passed = true;
    let mut max_ratio = BigRational::zero();
    let mut arg = (0u32, 0u32);
    for n in 2..=40u32 {
        let bound = rat(4, n as i64);
        for k in 2..=n {
            let f = lemma_k_sum(n, k);
            if f > bound {
                passed = false;
            }
            let ratio = &f / &bound;
            if ratio > max_ratio {
                max_ratio = ratio;
                arg = (n, k);
            }
        }
    }
    let detail = format!(
        "F(n,k) <= 4/n for all 2 <= k <= n <= 40: {passed}; tightest at (n,k) = {arg:?} \
         with F(n,k) n/4 = {:.6}",
        max_ratio.to_f64().unwrap()
    );
    result(8, "composition sums", passed, detail)
}

/// Vertex-factorization inequality on every separating stable graph with
/// g <= 4 and n <= 3 (scaled arithmetic, relative tolerance 1e-12).
fn separating_bound() -> CriterionResult {
    let mut passed = true;
    let mut checked = 0usize;
    let mut pairs = 0usize;
    for g in 0..=4u32 {
        for n in 0..=3usize {
            if 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            pairs += 1;
            for (graph, _) in enumerate_stable_graphs(g, n).unwrap() {
                if !graph.is_separating() {
                    continue;
                }
                let (_, _, holds) = lemma_kk_check(&graph).unwrap();
                passed &= holds;
                checked += 1;
            }
        }
    }
    let detail = format!(
        "{checked} separating graphs over {pairs} stable (g,n) pairs with g <= 4, n <= 3; \
         inequality holds for all: {passed}"
    );
    result(9, "separating bound", passed, detail)
}

/// Stable-graph class counts from the enumerator against an independent
/// generator that canonicalizes over every vertex permutation, plus the
/// pinned two-class law at (1,1).
fn class_counts() -> CriterionResult {
    let eleven = enumerate_stable_graphs(1, 1).unwrap();
    let sep11 = eleven.iter().filter(|(g, _)| g.is_separating()).count();
    let mut auts11: Vec<u64> = eleven.iter().map(|&(_, a)| a).collect();
    auts11.sort_unstable();
    let mut passed = eleven.len() == 2 && sep11 == 0 && auts11 == [1, 2];
    let mut detail = format!(
        "(1,1): {} classes, {sep11} separating, aut orders {auts11:?} (expect 2/0/[1,2]);",
        eleven.len()
    );
    for &(g, n) in &[(0u32, 3usize), (0, 4), (0, 5), (1, 2), (2, 1), (2, 2)] {
        let fast = enumerate_stable_graphs(g, n).unwrap();
        let fast_sep = fast.iter().filter(|(gr, _)| gr.is_separating()).count();
        let mut fast_auts: Vec<u64> = fast.iter().map(|&(_, a)| a).collect();
        fast_auts.sort_unstable();
        let (total, sep, auts) = oracle_enumerate(g, n);
        let ok = fast.len() == total && fast_sep == sep && fast_auts == auts;
        passed &= ok;
        write!(detail, " ({g},{n}): {total} classes, {sep} separating, generators agree: {ok};")
            .unwrap();
    }
    result(10, "class counts", passed, detail)
}

/// Byte-identical sample logs across reruns and worker counts 1, 4, 8, and
/// histogram merging invariant under randomized splits and orders.
fn determinism() -> CriterionResult {
    let mut logs = Vec::new();
    for workers in [1usize, 1, 4, 8] {
        let mut cfg = RunConfig::new(2, 7);
        cfg.trials = 60;
        cfg.workers = workers;
        let records = run_trials(&cfg).unwrap();
        let mut buf = Vec::new();
        write_sample_jsonl(&cfg, &records, true, &mut buf).unwrap();
        logs.push(buf);
    }
    let bytes_ok = logs.windows(2).all(|w| w[0] == w[1]);

    let cfg = RunConfig::new(2, 7);
    let base = {
        let mut cfg = cfg.clone();
        cfg.trials = 60;
        run_trials(&cfg).unwrap()
    };
    let single: Vec<HistogramAccumulator> = base
        .iter()
        .map(|r| {
            let mut h = HistogramAccumulator::new(0.0, 0.08, 50);
            h.observe_trial(r.cycles.iter().map(|c| c.len));
            h
        })
        .collect();
    let sequential = single
        .iter()
        .skip(1)
        .fold(single[0].clone(), |acc, h| acc.merge(h).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut merge_ok = true;
    for _ in 0..5 {
        let mut pool = single.clone();
        // random pairwise reduction: associativity plus commutativity
        while pool.len() > 1 {
            let i = (rng.next_u64() % pool.len() as u64) as usize;
            let a = pool.swap_remove(i);
            let j = (rng.next_u64() % pool.len() as u64) as usize;
            let b = pool.swap_remove(j);
            pool.push(if rng.next_u64() % 2 == 0 {
                a.merge(&b).unwrap()
            } else {
                b.merge(&a).unwrap()
            });
        }
        merge_ok &= pool[0] == sequential;
    }
    let passed = bytes_ok && merge_ok;
    let detail = format!(
        "60-trial genus-2 logs byte-identical across reruns and workers 1/4/8: {bytes_ok}; \
         randomized histogram merge reductions equal the sequential fold: {merge_ok}"
    );
    result(11, "determinism", passed, detail)
}

/// Independent stable-graph generator: walks every labelled assignment of
/// genera, leaves, loops, and edge multiplicities, canonicalizes over all
/// vertex permutations, and reads automorphism orders off the stabilizer
/// count times the loop/edge factors. Returns (classes, separating classes,
/// sorted automorphism orders).
pub fn oracle_enumerate(g: u32, n: usize) -> (usize, usize, Vec<u64>) {
    let chi_total = (2 * g as i64 - 2 + n as i64) as usize;
    let mut classes: HashMap<Vec<u64>, u64> = HashMap::new();
    for v in 1..=chi_total {
        for genera in mixed_radix(g as usize + 1, v) {
            let gsum: u32 = genera.iter().map(|&x| x as u32).sum();
            if gsum > g {
                continue;
            }
            let e = (g - gsum) as usize + v - 1;
            for owner in mixed_radix(v, n) {
                let mut leafsets = vec![Vec::new(); v];
                for (label, &vtx) in owner.iter().enumerate() {
                    leafsets[vtx].push(label as u32 + 1);
                }
                let cells = v + v * (v - 1) / 2;
                let mut acc = vec![0u32; cells];
                distribute(e as u32, 0, &mut acc, &mut |fill| {
                    try_candidate(&genera, &leafsets, fill, &mut classes);
                });
            }
        }
    }
    let total = classes.len();
    let sep = classes.keys().filter(|k| k[0] >= 2).count();
    let mut auts: Vec<u64> = classes.values().copied().collect();
    auts.sort_unstable();
    (total, sep, auts)
}

fn try_candidate(
    genera: &[usize],
    leafsets: &[Vec<u32>],
    fill: &[u32],
    classes: &mut HashMap<Vec<u64>, u64>,
) {
    let v = genera.len();
    let loops = &fill[..v];
    let mut adj = vec![vec![0u32; v]; v];
    let mut cell = v;
    for i in 0..v {
        for j in i + 1..v {
            adj[i][j] = fill[cell];
            adj[j][i] = fill[cell];
            cell += 1;
        }
    }
    for i in 0..v {
        let valency =
            leafsets[i].len() as i64 + 2 * loops[i] as i64 + adj[i].iter().sum::<u32>() as i64;
        if 2 * genera[i] as i64 - 2 + valency <= 0 {
            return;
        }
    }
    let mut seen = vec![false; v];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..v {
            if adj[i][j] > 0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return;
    }

    let mut best: Option<Vec<u64>> = None;
    let mut hits = 0u64;
    permute(&mut (0..v).collect::<Vec<_>>(), 0, &mut |perm| {
        let mut word = vec![v as u64];
        for &p in perm {
            word.push(genera[p] as u64);
            word.push(leafsets[p].len() as u64);
            word.extend(leafsets[p].iter().map(|&l| l as u64));
            word.push(loops[p] as u64);
        }
        for &pi in perm {
            for &pj in perm {
                word.push(adj[pi][pj] as u64);
            }
        }
        match &mut best {
            Some(b) => match word.cmp(b) {
                std::cmp::Ordering::Less => {
                    *b = word;
                    hits = 1;
                }
                std::cmp::Ordering::Equal => hits += 1,
                std::cmp::Ordering::Greater => {}
            },
            None => {
                best = Some(word);
                hits = 1;
            }
        }
    });
    let mut aut = hits;
    for i in 0..v {
        aut *= (1..=loops[i] as u64).product::<u64>() << loops[i];
        for j in i + 1..v {
            aut *= (1..=adj[i][j] as u64).product::<u64>();
        }
    }
    let prev = classes.insert(best.unwrap(), aut);
    assert!(prev.is_none_or(|p| p == aut), "inconsistent automorphism count");
}

fn mixed_radix(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; len];
    loop {
        out.push(cur.clone());
        let mut pos = 0;
        loop {
            if pos == len {
                return out;
            }
            cur[pos] += 1;
            if cur[pos] < base {
                break;
            }
            cur[pos] = 0;
            pos += 1;
        }
    }
}

fn distribute(total: u32, cell: usize, acc: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if cell + 1 == acc.len() {
        acc[cell] = total;
        f(acc);
        return;
    }
    for x in 0..=total {
        acc[cell] = x;
        distribute(total - x, cell + 1, acc, f);
    }
    acc[cell] = 0;
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rooted_map_law_at_small_genus() {
        let g1 = enumerate_rooted_maps(1);
        assert_eq!(g1.len(), 1);
        assert_eq!(g1.values().sum::<u64>(), 1);

        let g2 = enumerate_rooted_maps(2);
        assert_eq!(g2.len(), 9);
        assert_eq!(g2.values().sum::<u64>(), 105);
    }

    #[test]
    fn face_word_is_rotation_invariant() {
        // genus 1 has a single isomorphism class, so every sampled rooting
        // canonicalizes to the same word
        let a = sample_map(&SamplerConfig::new(1, 8)).unwrap().map;
        let b = sample_map(&SamplerConfig::new(1, 8).with_trial(5)).unwrap().map;
        assert_eq!(canonical_face_word(a.graph()), canonical_face_word(b.graph()));
    }

    #[test]
    fn rational_genus0_pins_small_values() {
        // V(0,3) = 1 and V(0,4) at unit lengths = 2
        assert_eq!(rational_genus0(&[rat(1, 1), rat(1, 1), rat(1, 1)]), rat(1, 1));
        assert_eq!(rational_genus0(&vec![rat(1, 1); 4]), rat(2, 1));
    }
}
