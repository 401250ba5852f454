use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A contiguous run of hops on the circle. Hop `h` carries the qubits from
/// position `h` to `h + 1 (mod N)`; the segment's members are the parties
/// that send on its hops.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subcircle {
    pub start: usize,
    pub hops: usize,
}

impl Subcircle {
    pub fn members(&self, n: usize) -> Vec<usize> {
        (0..self.hops).map(|i| (self.start + i) % n).collect()
    }

    /// Position of the party that receives the segment's last hop and
    /// re-verifies the channel.
    pub fn boundary(&self, n: usize) -> usize {
        (self.start + self.hops) % n
    }

    pub fn last_hop(&self, n: usize) -> usize {
        (self.start + self.hops - 1) % n
    }
}

pub fn check_partition(n: usize, segments: &[Subcircle]) -> Result<()> {
    let first = segments
        .first()
        .ok_or_else(|| Error::invalid("a partition needs at least one segment"))?;
    let mut next = first.start;
    for seg in segments {
        if seg.hops == 0 || seg.start >= n || seg.start != next {
            return Err(Error::invalid(format!(
                "segments of the {n}-circle are not contiguous"
            )));
        }
        next = (seg.start + seg.hops) % n;
    }
    if segments.iter().map(|s| s.hops).sum::<usize>() != n {
        return Err(Error::invalid(format!(
            "segments do not cover the {n}-circle exactly once"
        )));
    }
    Ok(())
}

/// Splits the circle into `l` segments starting at position 0. Each step
/// halves the longest segment (the earliest on ties), so a partition into
/// `l + 1` segments refines the one into `l`.
pub fn partition_subcircles(n: usize, l: usize) -> Result<Vec<Subcircle>> {
    if l == 0 || l > n {
        return Err(Error::invalid(format!(
            "cannot split {n} hops into {l} sub-circles"
        )));
    }
    let mut segments = vec![Subcircle { start: 0, hops: n }];
    while segments.len() < l {
        let (i, longest) = segments.iter().enumerate().fold((0, 0), |best, (i, s)| {
            if s.hops > best.1 {
                (i, s.hops)
            } else {
                best
            }
        });
        let head = longest.div_ceil(2);
        let seg = segments[i];
        segments[i].hops = head;
        segments.insert(
            i + 1,
            Subcircle {
                start: seg.start + head,
                hops: longest - head,
            },
        );
    }
    Ok(segments)
}

/// Segments beginning at each of the given positions.
pub fn partition_from_boundaries(n: usize, boundaries: &[usize]) -> Result<Vec<Subcircle>> {
    let mut b = boundaries.to_vec();
    b.sort_unstable();
    b.dedup();
    if b.is_empty() || b.len() != boundaries.len() || *b.last().expect("non-empty") >= n {
        return Err(Error::invalid(format!(
            "invalid boundaries {boundaries:?} for a {n}-circle"
        )));
    }
    Ok((0..b.len())
        .map(|i| {
            let end = if i + 1 < b.len() { b[i + 1] } else { b[0] + n };
            Subcircle {
                start: b[i],
                hops: end - b[i],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halves() {
        assert_eq!(
            partition_subcircles(6, 1).unwrap(),
            [Subcircle { start: 0, hops: 6 }]
        );
        assert_eq!(
            partition_subcircles(6, 2).unwrap(),
            [
                Subcircle { start: 0, hops: 3 },
                Subcircle { start: 3, hops: 3 }
            ]
        );
        let four = partition_subcircles(7, 4).unwrap();
        assert_eq!(
            four.iter().map(|s| s.hops).collect::<Vec<_>>(),
            [2, 2, 2, 1]
        );
        assert!(partition_subcircles(6, 0).is_err());
        assert!(partition_subcircles(6, 7).is_err());
        for l in 1..=6 {
            check_partition(6, &partition_subcircles(6, l).unwrap()).unwrap();
        }
    }

    #[test]
    fn boundaries() {
        let p = partition_from_boundaries(6, &[2, 5]).unwrap();
        assert_eq!(
            p,
            [
                Subcircle { start: 2, hops: 3 },
                Subcircle { start: 5, hops: 3 }
            ]
        );
        assert_eq!(p[1].members(6), [5, 0, 1]);
        assert_eq!(p[1].boundary(6), 2);
        check_partition(6, &p).unwrap();
        assert!(partition_from_boundaries(6, &[6]).is_err());
        assert!(check_partition(6, &[Subcircle { start: 0, hops: 5 }]).is_err());
    }
}
