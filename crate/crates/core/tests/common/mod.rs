//! Test helpers shared by the integration tests: brute-force reference
//! tallies (which never call into the tally code under test), profile
//! generators and the session command driver.
#![allow(dead_code)]

pub mod sessions;

use consilium::ranking::Ranking;
use consilium::voting::{Ballot, Profile};
use rand::seq::SliceRandom;
use rand::Rng;

/// Ballots as alternative indices, best first.
pub type RawBallots = Vec<Vec<usize>>;

pub fn alt_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("alt{i}")).collect()
}

pub fn random_ballots<R: Rng>(rng: &mut R, n: usize, voters: usize) -> RawBallots {
    (0..voters)
        .map(|_| {
            let mut b: Vec<usize> = (0..n).collect();
            b.shuffle(rng);
            b
        })
        .collect()
}

/// A random profile with `1..=max_n` alternatives and `1..=max_v` voters.
pub fn random_profile<R: Rng>(rng: &mut R, max_n: usize, max_v: usize) -> (usize, RawBallots) {
    let n = rng.gen_range(1..=max_n);
    let v = rng.gen_range(1..=max_v);
    (n, random_ballots(rng, n, v))
}

/// Rotations of one random order (a Latin square), repeated `copies`
/// times. Every alternative loses to its predecessor by majority, so no
/// Condorcet winner exists.
pub fn forced_cycle<R: Rng>(rng: &mut R, n: usize, copies: usize) -> RawBallots {
    assert!(n >= 3);
    let mut base: Vec<usize> = (0..n).collect();
    base.shuffle(rng);
    let mut out = Vec::new();
    for _ in 0..copies {
        for r in 0..n {
            let mut b = base.clone();
            b.rotate_left(r);
            out.push(b);
        }
    }
    out
}

pub fn to_profile(n: usize, ballots: &RawBallots) -> Profile {
    let names = alt_names(n);
    let ballots = ballots
        .iter()
        .enumerate()
        .map(|(v, b)| {
            Ballot::new(
                format!("voter{v}"),
                Ranking::new(b.iter().map(|&i| names[i].clone())),
            )
        })
        .collect();
    Profile::new(names, ballots).expect("generated profile is valid")
}

fn position(ballot: &[usize], alt: usize) -> usize {
    ballot.iter().position(|&x| x == alt).unwrap()
}

/// Walks every ballot, awarding `n - position` points (top = n, last = 1).
pub fn oracle_borda(n: usize, ballots: &RawBallots) -> Vec<u64> {
    let mut pts = vec![0u64; n];
    for b in ballots {
        for (pos, &alt) in b.iter().enumerate() {
            pts[alt] += (n - pos) as u64;
        }
    }
    pts
}

/// Number of voters placing `a` above `b`, by scanning each ballot.
pub fn oracle_prefer(ballots: &RawBallots, a: usize, b: usize) -> u32 {
    ballots
        .iter()
        .filter(|bal| position(bal, a) < position(bal, b))
        .count() as u32
}

#[allow(clippy::needless_range_loop)]
pub fn oracle_pairwise(n: usize, ballots: &RawBallots) -> Vec<Vec<u32>> {
    let mut w = vec![vec![0u32; n]; n];
    for bal in ballots {
        for a in 0..n {
            for b in 0..n {
                if a != b && position(bal, a) < position(bal, b) {
                    w[a][b] += 1;
                }
            }
        }
    }
    w
}

fn majority(ballots: &RawBallots, a: usize, b: usize) -> bool {
    oracle_prefer(ballots, a, b) as f64 > ballots.len() as f64 / 2.0
}

/// Every alternative that beats all others by strict majority.
pub fn oracle_condorcet_set(n: usize, ballots: &RawBallots) -> Vec<usize> {
    (0..n)
        .filter(|&a| (0..n).filter(|&b| b != a).all(|b| majority(ballots, a, b)))
        .collect()
}

pub fn oracle_copeland(n: usize, ballots: &RawBallots) -> Vec<i64> {
    (0..n)
        .map(|a| {
            let mut s = 0i64;
            for b in (0..n).filter(|&b| b != a) {
                if majority(ballots, a, b) {
                    s += 1;
                } else if majority(ballots, b, a) {
                    s -= 1;
                }
            }
            s
        })
        .collect()
}
