//! Joint subcarrier and power allocation.
//!
//! Every subcarrier is owned by at most one user and each user spreads its
//! power budget over the subcarriers it owns. The achievable rate of user `k`
//! on subcarrier `m` is `Δf·log2(1 + p·γ)` with `γ` the average SNR per watt.

use std::io::Write;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, Result};

/// Default ceiling on `K^M` for [`exhaustive_search`].
pub const DEFAULT_SEARCH_CAP: u64 = 10_000_000;

/// Exclusive subcarrier assignment with per-subcarrier transmit powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Owner of each subcarrier.
    pub owner: Vec<Option<usize>>,
    /// `K × M` powers in watts, nonzero only where the user owns the column.
    pub power: Array2<f64>,
}

impl Allocation {
    /// No subcarrier assigned.
    pub fn empty(users: usize, subcarriers: usize) -> Self {
        Allocation {
            owner: vec![None; subcarriers],
            power: Array2::zeros((users, subcarriers)),
        }
    }

    pub fn users(&self) -> usize {
        self.power.nrows()
    }

    pub fn subcarriers(&self) -> usize {
        self.owner.len()
    }

    /// Binary `K × M` assignment matrix.
    pub fn assignment(&self) -> Array2<u8> {
        let mut b = Array2::zeros((self.users(), self.subcarriers()));
        for (m, o) in self.owner.iter().enumerate() {
            if let Some(k) = o {
                b[[*k, m]] = 1;
            }
        }
        b
    }

    /// Subcarriers owned by user `k`, ascending.
    pub fn subcarriers_of(&self, k: usize) -> Vec<usize> {
        (0..self.subcarriers())
            .filter(|&m| self.owner[m] == Some(k))
            .collect()
    }

    /// Writes the assignment matrix as CSV: one row per user, one column
    /// per subcarrier.
    pub fn write_assignment_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let b = self.assignment();
        write_matrix(out, self.subcarriers(), b.rows().into_iter().map(|r| {
            r.iter().map(|x| x.to_string()).collect::<Vec<_>>()
        }))
    }

    /// Writes the power matrix in watts with the layout of
    /// [`Allocation::write_assignment_csv`].
    pub fn write_power_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_matrix(out, self.subcarriers(), self.power.rows().into_iter().map(|r| {
            r.iter().map(|x| format!("{x:.8e}")).collect::<Vec<_>>()
        }))
    }
}

fn write_matrix<W: Write>(
    mut out: W,
    columns: usize,
    rows: impl Iterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    let header: Vec<String> = std::iter::once("k".to_string())
        .chain((0..columns).map(|m| format!("m{m}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (k, row) in rows.enumerate() {
        writeln!(out, "{k},{}", row.join(","))?;
    }
    Ok(())
}

/// Powers and water level of one water-filling solve.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFillResult {
    pub powers: Vec<f64>,
    /// The level `Δ` with `p_i = max(Δ − 1/γ_i, 0)`.
    pub water_level: f64,
}

/// Water level for inverse SNRs sorted ascending.
///
/// Grows the active set while the next floor lies below the level implied by
/// the current set.
fn level_sorted(inv_sorted: impl Iterator<Item = f64>, budget: f64) -> f64 {
    let mut sum = 0.0;
    let mut level = f64::NAN;
    for (i, x) in inv_sorted.enumerate() {
        if i > 0 && x >= level {
            break;
        }
        sum += x;
        level = (budget + sum) / (i + 1) as f64;
    }
    level
}

/// Maximizes `Σ log2(1 + p_i γ_i)` under `Σ p_i ≤ budget`.
///
/// Entries with `γ = 0` can carry no rate and always get zero power.
pub fn water_fill(snrs: &[f64], budget: f64) -> Result<WaterFillResult> {
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::Domain(format!("power budget {budget} must be finite and non-negative")));
    }
    if let Some(g) = snrs.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::Domain(format!("SNR {g} must be finite and non-negative")));
    }
    let mut inv: Vec<f64> = snrs.iter().filter(|&&g| g > 0.0).map(|g| 1.0 / g).collect();
    if inv.is_empty() {
        return Ok(WaterFillResult {
            powers: vec![0.0; snrs.len()],
            water_level: 0.0,
        });
    }
    inv.sort_by(f64::total_cmp);
    let level = level_sorted(inv.into_iter(), budget);
    Ok(WaterFillResult {
        powers: snrs
            .iter()
            .map(|&g| if g > 0.0 { (level - 1.0 / g).max(0.0) } else { 0.0 })
            .collect(),
        water_level: level,
    })
}

fn check_inputs(avg_snr: &Array2<f64>, budgets: &[f64]) -> Result<()> {
    if avg_snr.nrows() == 0 {
        return Err(Error::InvalidInput("at least one user is required".into()));
    }
    if budgets.len() != avg_snr.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} budgets for {} users",
            budgets.len(),
            avg_snr.nrows()
        )));
    }
    if let Some(g) = avg_snr.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::Domain(format!("SNR {g} must be finite and non-negative")));
    }
    if let Some(p) = budgets.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::Domain(format!("power budget {p} must be finite and non-negative")));
    }
    Ok(())
}

/// Water-fills every user over the subcarriers it owns.
fn fill_owned(owner: Vec<Option<usize>>, avg_snr: &Array2<f64>, budgets: &[f64]) -> Result<Allocation> {
    let mut alloc = Allocation {
        owner,
        power: Array2::zeros(avg_snr.dim()),
    };
    for (k, &budget) in budgets.iter().enumerate() {
        let set = alloc.subcarriers_of(k);
        let g: Vec<f64> = set.iter().map(|&m| avg_snr[[k, m]]).collect();
        let wf = water_fill(&g, budget)?;
        for (&m, p) in set.iter().zip(wf.powers) {
            alloc.power[[k, m]] = p;
        }
    }
    Ok(alloc)
}

/// Index of the largest value; ties go to the smallest index.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Inverse SNRs of one user's allocated set, kept sorted.
#[derive(Default)]
struct SortedInverse(Vec<f64>);

impl SortedInverse {
    fn position(&self, x: f64) -> usize {
        self.0.partition_point(|&y| y <= x)
    }

    /// Level after tentatively adding `x`, without modifying the set.
    fn level_with(&self, x: f64, budget: f64) -> f64 {
        let at = self.position(x);
        let merged = self.0[..at]
            .iter()
            .copied()
            .chain(std::iter::once(x))
            .chain(self.0[at..].iter().copied());
        level_sorted(merged, budget)
    }

    fn insert(&mut self, x: f64) {
        let at = self.position(x);
        self.0.insert(at, x);
    }
}

/// Greedy joint subcarrier and power allocation.
///
/// Subcarriers are visited in a random order. Each is offered to every user,
/// who water-fills over its current set plus the offered subcarrier; the user
/// reaching the largest `p·γ` on it keeps it (ties to the smallest index).
/// If nobody reaches a positive value, the subcarrier goes to the user with
/// the largest `γ` and carries no power. A final water-filling per user sets
/// the powers.
pub fn jspa_greedy<R: Rng + ?Sized>(avg_snr: &Array2<f64>, budgets: &[f64], rng: &mut R) -> Result<Allocation> {
    check_inputs(avg_snr, budgets)?;
    let (k_count, m_count) = avg_snr.dim();
    let mut order: Vec<usize> = (0..m_count).collect();
    order.shuffle(rng);

    let mut sets: Vec<SortedInverse> = (0..k_count).map(|_| SortedInverse::default()).collect();
    let mut owner = vec![None; m_count];
    for m in order {
        let score = |k: usize| {
            let g = avg_snr[[k, m]];
            if g <= 0.0 {
                return 0.0;
            }
            let p = (sets[k].level_with(1.0 / g, budgets[k]) - 1.0 / g).max(0.0);
            p * g
        };
        let scores: Vec<f64> = (0..k_count).map(score).collect();
        let winner = if scores.iter().all(|&s| s <= 0.0) {
            argmax(avg_snr.column(m).iter().copied())
        } else {
            argmax(scores.into_iter())
        };
        owner[m] = Some(winner);
        let g = avg_snr[[winner, m]];
        if g > 0.0 {
            sets[winner].insert(1.0 / g);
        }
    }
    fill_owned(owner, avg_snr, budgets)
}

/// Assigns each subcarrier to the user with the largest `γ`, then water-fills.
pub fn maxch_allocate(avg_snr: &Array2<f64>, budgets: &[f64]) -> Result<Allocation> {
    check_inputs(avg_snr, budgets)?;
    let owner = avg_snr
        .columns()
        .into_iter()
        .map(|c| Some(argmax(c.iter().copied())))
        .collect();
    fill_owned(owner, avg_snr, budgets)
}

/// Splits each user's budget equally over the subcarriers it owns.
pub fn equal_power(assign: &Array2<u8>, budgets: &[f64]) -> Result<Array2<f64>> {
    if budgets.len() != assign.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} budgets for {} users",
            budgets.len(),
            assign.nrows()
        )));
    }
    let mut p = Array2::zeros(assign.dim());
    for (k, row) in assign.rows().into_iter().enumerate() {
        let count = row.iter().filter(|&&b| b != 0).count();
        if count == 0 {
            continue;
        }
        let share = budgets[k] / count as f64;
        for (m, &b) in row.iter().enumerate() {
            if b != 0 {
                p[[k, m]] = share;
            }
        }
    }
    Ok(p)
}

/// Sum of `log2(1 + p·γ)` over the water-filled subset `mask` of `gammas`.
fn subset_rate(gammas: &[f64], mask: usize, budget: f64) -> f64 {
    let g: Vec<f64> = gammas
        .iter()
        .enumerate()
        .filter(|(m, _)| mask >> m & 1 == 1)
        .map(|(_, &g)| g)
        .collect();
    let wf = water_fill(&g, budget).expect("inputs checked");
    g.iter().zip(&wf.powers).map(|(g, p)| (1.0 + p * g).log2()).sum()
}

/// Best exclusive assignment by enumerating all `K^M` of them.
///
/// Refuses when `K^M` exceeds `cap`. Ties keep the assignment met first in
/// lexicographic order of the owner vector.
pub fn exhaustive_search(avg_snr: &Array2<f64>, budgets: &[f64], cap: u64) -> Result<Allocation> {
    check_inputs(avg_snr, budgets)?;
    let (k_count, m_count) = avg_snr.dim();
    let required = (k_count as f64).powi(m_count as i32);
    if required > cap as f64 {
        return Err(Error::SearchCapExceeded { required, cap });
    }
    if k_count == 1 || m_count == 0 {
        return fill_owned(vec![Some(0); m_count], avg_snr, budgets);
    }
    // Only reachable when K ≥ 2, so M ≤ log2(cap) and the tables stay small.
    let tables: Vec<Vec<f64>> = (0..k_count)
        .map(|k| {
            let g = avg_snr.row(k).to_vec();
            (0..1usize << m_count).map(|mask| subset_rate(&g, mask, budgets[k])).collect()
        })
        .collect();

    struct Search<'a> {
        tables: &'a [Vec<f64>],
        masks: Vec<usize>,
        current: Vec<usize>,
        best: (f64, Vec<usize>),
    }
    impl Search<'_> {
        fn visit(&mut self, m: usize) {
            if m == self.current.len() {
                let total: f64 = self.masks.iter().zip(self.tables).map(|(&s, t)| t[s]).sum();
                if total > self.best.0 {
                    self.best = (total, self.current.clone());
                }
                return;
            }
            for k in 0..self.tables.len() {
                self.current[m] = k;
                self.masks[k] |= 1 << m;
                self.visit(m + 1);
                self.masks[k] &= !(1 << m);
            }
        }
    }
    let mut search = Search {
        tables: &tables,
        masks: vec![0; k_count],
        current: vec![0; m_count],
        best: (f64::NEG_INFINITY, vec![0; m_count]),
    };
    search.visit(0);
    fill_owned(search.best.1.into_iter().map(Some).collect(), avg_snr, budgets)
}

/// `Σ_m Δf·log2(1 + p·γ)` over owned subcarriers, bits per second.
pub fn throughput(alloc: &Allocation, avg_snr: &Array2<f64>, delta_f: f64) -> f64 {
    alloc
        .owner
        .iter()
        .enumerate()
        .filter_map(|(m, o)| o.map(|k| (1.0 + alloc.power[[k, m]] * avg_snr[[k, m]]).log2()))
        .sum::<f64>()
        * delta_f
}

/// Fraction of users owning at least one subcarrier.
pub fn active_user_ratio(alloc: &Allocation, users: usize) -> f64 {
    if users == 0 {
        return 0.0;
    }
    let mut active = vec![false; users];
    for k in alloc.owner.iter().flatten() {
        if *k < users {
            active[*k] = true;
        }
    }
    active.iter().filter(|&&a| a).count() as f64 / users as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rate(g: &[f64], p: &[f64]) -> f64 {
        g.iter().zip(p).map(|(g, p)| (1.0 + g * p).log2()).sum()
    }

    #[test]
    fn water_fill_trivial_cases() {
        let r = water_fill(&[3.0], 2.0).unwrap();
        assert!((r.powers[0] - 2.0).abs() < 1e-15);
        let r = water_fill(&[2.0, 2.0], 1.0).unwrap();
        assert_eq!(r.powers, vec![0.5, 0.5]);
        assert!(water_fill(&[], 1.0).unwrap().powers.is_empty());
        assert_eq!(water_fill(&[0.0, 4.0], 1.0).unwrap().powers, vec![0.0, 1.0]);
        assert!(water_fill(&[1.0], -1.0).is_err());
    }

    #[test]
    fn water_fill_matches_ternary_oracle() {
        // Dual oracle: bisect the level until the powers spend the budget.
        let g = [10.0, 1.0, 0.1];
        let r = water_fill(&g, 1.0).unwrap();
        let spend = |l: f64| g.iter().map(|g| (l - 1.0 / g).max(0.0)).sum::<f64>();
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if spend(mid) > 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle: Vec<f64> = g.iter().map(|g| (lo - 1.0 / g).max(0.0)).collect();
        assert!((rate(&g, &r.powers) - rate(&g, &oracle)).abs() < 1e-8);
        // Frozen from the oracle: level 1.05, only the first two are active.
        assert!((r.water_level - 1.05).abs() < 1e-12);
        assert_eq!(r.powers[2], 0.0);
    }

    #[test]
    fn greedy_single_user_takes_everything() {
        let g = array![[1.0, 5.0, 0.2, 3.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = jspa_greedy(&g, &[1.0], &mut rng).unwrap();
        assert!(a.owner.iter().all(|o| *o == Some(0)));
        let wf = water_fill(&g.row(0).to_vec(), 1.0).unwrap();
        for m in 0..4 {
            assert!((a.power[[0, m]] - wf.powers[m]).abs() < 1e-15);
        }
        assert_eq!(a, maxch_allocate(&g, &[1.0]).unwrap());
    }

    #[test]
    fn greedy_gives_dominant_subcarriers() {
        let mut g = Array2::from_elem((4, 4), 0.01);
        for k in 0..4 {
            g[[k, (k + 1) % 4]] = 100.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = jspa_greedy(&g, &[1.0; 4], &mut rng).unwrap();
        for k in 0..4 {
            assert_eq!(a.owner[(k + 1) % 4], Some(k));
        }
    }

    #[test]
    fn greedy_zero_column_goes_to_argmax_without_power() {
        let g = array![[0.0, 1.0], [0.0, 2.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = jspa_greedy(&g, &[1.0, 1.0], &mut rng).unwrap();
        assert_eq!(a.owner[0], Some(0));
        assert_eq!(a.power.column(0).sum(), 0.0);
        assert!(jspa_greedy(&Array2::zeros((0, 3)), &[], &mut rng).is_err());
    }

    #[test]
    fn maxch_matches_argmax_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Array2::from_shape_fn((3, 6), |_| rng.gen::<f64>());
        let a = maxch_allocate(&g, &[1.0; 3]).unwrap();
        for m in 0..6 {
            let mut best = 0;
            for k in 1..3 {
                if g[[k, m]] > g[[best, m]] {
                    best = k;
                }
            }
            assert_eq!(a.owner[m], Some(best));
        }
    }

    #[test]
    fn equal_power_splits_budget() {
        let b = array![[1u8, 1, 1, 1, 0], [0, 0, 0, 0, 1], [0, 0, 0, 0, 0]];
        let p = equal_power(&b, &[0.2, 0.3, 0.5]).unwrap();
        assert!((p[[0, 0]] - 0.05).abs() < 1e-15);
        assert_eq!(p.row(1).sum(), 0.3);
        assert_eq!(p.row(2).sum(), 0.0);
    }

    #[test]
    fn exhaustive_small_cases() {
        let g = array![[4.0, 1.0], [1.0, 4.0]];
        let a = exhaustive_search(&g, &[1.0, 1.0], DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(a.owner, vec![Some(0), Some(1)]);
        let one = array![[1.0, 2.0, 3.0]];
        let a = exhaustive_search(&one, &[1.0], DEFAULT_SEARCH_CAP).unwrap();
        assert!(a.owner.iter().all(|o| *o == Some(0)));
        let big = Array2::from_elem((10, 8), 1.0);
        let e = exhaustive_search(&big, &[1.0; 10], DEFAULT_SEARCH_CAP).unwrap_err();
        assert_eq!(e.code(), "E_SEARCH_CAP");
    }

    #[test]
    fn throughput_examples() {
        let g = array![[1.0]];
        let mut a = Allocation::empty(1, 1);
        assert_eq!(throughput(&a, &g, 1.0), 0.0);
        a.owner[0] = Some(0);
        a.power[[0, 0]] = 1.0;
        assert!((throughput(&a, &g, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn active_ratio_examples() {
        let mut a = Allocation::empty(4, 3);
        a.owner = vec![Some(2); 3];
        assert_eq!(active_user_ratio(&a, 4), 0.25);
        a.owner = vec![Some(0), Some(1), Some(2)];
        assert_eq!(active_user_ratio(&a, 3), 1.0);
    }

    #[test]
    fn csv_layout() {
        let mut a = Allocation::empty(2, 3);
        a.owner = vec![Some(1), None, Some(0)];
        a.power[[1, 0]] = 0.5;
        let mut buf = Vec::new();
        a.write_assignment_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,m0,m1,m2\n0,0,0,1\n1,1,0,0\n");
        let mut buf = Vec::new();
        a.write_power_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("k,m0,m1,m2\n0,0.00000000e0,"));
    }
}
