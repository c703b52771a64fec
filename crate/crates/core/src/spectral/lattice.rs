use crate::error::{Error, Result};

/// Default ceiling on the number of modes a [`Lattice`] may materialize.
pub const DEFAULT_MODE_BUDGET: u64 = 1 << 22;

/// Integer frequencies `n` in `Z^d` with Euclidean norm `|n| <= N`.
///
/// Modes are ordered by ascending `|n|^2`, ties broken lexicographically, so
/// the modes of the ball of radius `M <= N` are always a prefix of the list.
/// Samplers rely on that prefix property: two fields drawn from the same
/// stream at cutoffs `M <= N` agree on every mode with `|n| <= M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    d: usize,
    cutoff: u32,
    modes: Vec<[i32; 3]>,
    norm2: Vec<u64>,
    neg: Vec<usize>,
    dense: Vec<u32>,
}

impl Lattice {
    pub fn new(d: usize, cutoff: u32) -> Result<Self> {
        Self::with_budget(d, cutoff, DEFAULT_MODE_BUDGET)
    }

    pub fn with_budget(d: usize, cutoff: u32, budget: u64) -> Result<Self> {
        check_dimension(d)?;
        let count = mode_count(d, cutoff)?;
        if count > budget {
            return Err(Error::LatticeBudget { d, cutoff, modes: count, budget });
        }

        let n = cutoff as i32;
        let r2 = (cutoff as u64).pow(2);
        let mut modes: Vec<[i32; 3]> = Vec::with_capacity(count as usize);
        let range = |active: bool| if active { -n..=n } else { 0..=0 };
        for a in range(true) {
            for b in range(d >= 2) {
                for c in range(d >= 3) {
                    let m = [a, b, c];
                    if norm2_of(&m) <= r2 {
                        modes.push(m);
                    }
                }
            }
        }
        modes.sort_by(|x, y| norm2_of(x).cmp(&norm2_of(y)).then(x.cmp(y)));
        debug_assert_eq!(modes.len() as u64, count);

        let side = 2 * cutoff as usize + 1;
        let mut dense = vec![u32::MAX; side.pow(d as u32)];
        for (i, m) in modes.iter().enumerate() {
            dense[cube_index(d, cutoff, m)] = i as u32;
        }
        let neg =
            modes.iter().map(|m| dense[cube_index(d, cutoff, &[-m[0], -m[1], -m[2]])] as usize).collect();
        let norm2 = modes.iter().map(norm2_of).collect();

        Ok(Self { d, cutoff, modes, norm2, neg, dense })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Mode `i` as a length-`d` slice.
    pub fn mode(&self, i: usize) -> &[i32] {
        &self.modes[i][..self.d]
    }

    pub fn modes(&self) -> impl Iterator<Item = &[i32]> + '_ {
        self.modes.iter().map(move |m| &m[..self.d])
    }

    /// Padded 3-vector of mode `i` (unused components are zero).
    pub(crate) fn mode3(&self, i: usize) -> [i32; 3] {
        self.modes[i]
    }

    pub fn norm2(&self, i: usize) -> u64 {
        self.norm2[i]
    }

    /// Index of `-n` for the mode at index `i`.
    pub fn neg(&self, i: usize) -> usize {
        self.neg[i]
    }

    /// Japanese bracket `<n> = (1 + |n|^2)^(1/2)` of mode `i`.
    pub fn bracket(&self, i: usize) -> f64 {
        (1.0 + self.norm2[i] as f64).sqrt()
    }

    /// Index of mode `n`, if it lies in the ball.
    pub fn index_of(&self, n: &[i32]) -> Option<usize> {
        if n.len() != self.d {
            return None;
        }
        let c = self.cutoff as i32;
        if n.iter().any(|&x| x < -c || x > c) {
            return None;
        }
        let mut m = [0i32; 3];
        m[..self.d].copy_from_slice(n);
        match self.dense[cube_index(self.d, self.cutoff, &m)] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    /// Number of leading modes with `|n| <= m`.
    pub fn prefix_len(&self, m: u32) -> usize {
        let r2 = (m as u64).pow(2);
        self.norm2.partition_point(|&k| k <= r2)
    }

    /// `true` for `n = 0` and for the lexicographically positive member of each pair `{n, -n}`.
    pub fn is_representative(&self, i: usize) -> bool {
        self.modes[i].iter().find(|&&x| x != 0).is_none_or(|&x| x > 0)
    }
}

fn norm2_of(m: &[i32; 3]) -> u64 {
    m.iter().map(|&x| (x as i64 * x as i64) as u64).sum()
}

fn cube_index(d: usize, cutoff: u32, m: &[i32; 3]) -> usize {
    let side = 2 * cutoff as usize + 1;
    m[..d].iter().fold(0usize, |acc, &x| acc * side + (x + cutoff as i32) as usize)
}

pub(crate) fn check_dimension(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// Exact number of `n` in `Z^d` with `|n| <= N`, counted in `O(N^(d-1))` without
/// materializing the lattice.
pub fn mode_count(d: usize, cutoff: u32) -> Result<u64> {
    check_dimension(d)?;
    let r2 = (cutoff as u64).pow(2);
    let n = cutoff as i64;
    let line = |rem: u64| 2 * isqrt(rem) + 1;
    Ok(match d {
        1 => line(r2),
        2 => (-n..=n).map(|a| line(r2 - (a * a) as u64)).sum(),
        _ => (-n..=n)
            .flat_map(|a| (-n..=n).map(move |b| (a * a + b * b) as u64))
            .filter(|&ab| ab <= r2)
            .map(|ab| line(r2 - ab))
            .sum(),
    })
}

/// Number of lattice points on each sphere `|n|^2 = k`, `k = 0..=N^2`.
pub(crate) fn shell_counts(d: usize, cutoff: u32) -> Result<Vec<u64>> {
    check_dimension(d)?;
    let r2 = (cutoff as u64).pow(2);
    let n = cutoff as i64;
    let mut counts = vec![0u64; r2 as usize + 1];
    let mut tally = |k: u64| {
        if k <= r2 {
            counts[k as usize] += 1;
        }
    };
    match d {
        1 => (-n..=n).for_each(|a| tally((a * a) as u64)),
        2 => {
            for a in -n..=n {
                for b in -n..=n {
                    tally((a * a + b * b) as u64);
                }
            }
        }
        _ => {
            for a in -n..=n {
                for b in -n..=n {
                    let ab = a * a + b * b;
                    if ab as u64 > r2 {
                        continue;
                    }
                    for c in -n..=n {
                        tally((ab + c * c) as u64);
                    }
                }
            }
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_count(d: usize, n: i32) -> u64 {
        let r = -n..=n;
        let mut count = 0;
        for a in r.clone() {
            for b in if d >= 2 { r.clone() } else { 0..=0 } {
                for c in if d >= 3 { r.clone() } else { 0..=0 } {
                    if a * a + b * b + c * c <= n * n {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn small_mode_counts() {
        assert_eq!(Lattice::new(1, 1).unwrap().len(), 3);
        assert_eq!(Lattice::new(2, 1).unwrap().len(), 5);
        assert_eq!(Lattice::new(2, 2).unwrap().len(), 13);
        assert_eq!(brute_count(2, 2), 13);
        let l = Lattice::new(1, 1).unwrap();
        let modes: Vec<i32> = l.modes().map(|m| m[0]).collect();
        assert_eq!(modes, vec![0, -1, 1]);
    }

    #[test]
    fn mode_count_matches_enumeration() {
        for d in 1..=3 {
            for n in 0..=9 {
                assert_eq!(mode_count(d, n as u32).unwrap(), brute_count(d, n), "d={d} N={n}");
            }
        }
    }

    #[test]
    fn negation_closed_and_prefix_ordered() {
        let l = Lattice::new(3, 5).unwrap();
        for i in 0..l.len() {
            let j = l.neg(i);
            let m = l.mode(i);
            let mj = l.mode(j);
            assert!(m.iter().zip(mj).all(|(a, b)| *a == -*b));
            assert_eq!(l.neg(j), i);
        }
        let small = Lattice::new(3, 3).unwrap();
        assert_eq!(l.prefix_len(3), small.len());
        for i in 0..small.len() {
            assert_eq!(small.mode(i), l.mode(i));
        }
    }

    #[test]
    fn one_representative_per_pair() {
        let l = Lattice::new(2, 4).unwrap();
        for i in 0..l.len() {
            let j = l.neg(i);
            if i == j {
                assert!(l.is_representative(i));
            } else {
                assert!(l.is_representative(i) ^ l.is_representative(j));
            }
        }
    }

    #[test]
    fn rejects_bad_dimension_and_budget() {
        assert_eq!(Lattice::new(4, 1), Err(Error::UnsupportedDimension(4)));
        assert_eq!(Lattice::new(0, 1), Err(Error::UnsupportedDimension(0)));
        match Lattice::with_budget(2, 10, 100) {
            Err(Error::LatticeBudget { modes, .. }) => assert_eq!(modes, brute_count(2, 10)),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn index_lookup() {
        let l = Lattice::new(2, 3).unwrap();
        assert_eq!(l.index_of(&[0, 0]), Some(0));
        let i = l.index_of(&[2, -2]).unwrap();
        assert_eq!(l.mode(i), &[2, -2]);
        assert_eq!(l.index_of(&[3, 3]), None);
        assert_eq!(l.index_of(&[4, 0]), None);
    }
}
