//! DTW with drops on both sequences.
//!
//! The table is indexed by prefix lengths `(a, b)`: clips `0..a` and
//! sentences `0..b` have been resolved. Each cell carries four states that
//! record whether clip `a-1` and sentence `b-1` belong to the most recent
//! matched pair. Only an item in the last pair may be matched again, so a
//! dropped item can never be re-matched and every item is charged exactly
//! once.

use std::collections::BTreeSet;

use super::{to_cost, DropCosts, SimilarityMatrix};
use crate::types::{Alignment, Assignment};

/// Which of the two trailing items are covered by the last matched pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tail {
    Both = 0,
    ClipOnly = 1,
    SentenceOnly = 2,
    Neither = 3,
}

const TAILS: [Tail; 4] = [
    Tail::Both,
    Tail::ClipOnly,
    Tail::SentenceOnly,
    Tail::Neither,
];

impl Tail {
    fn clip_in_pair(self) -> bool {
        matches!(self, Tail::Both | Tail::ClipOnly)
    }

    fn sentence_in_pair(self) -> bool {
        matches!(self, Tail::Both | Tail::SentenceOnly)
    }
}

#[derive(Debug, Clone, Copy)]
enum Move {
    /// Pair `(a-1, b-1)` with both items fresh.
    Diagonal,
    /// Pair `(a-1, b-1)` re-using sentence `b-1`.
    ReuseSentence,
    /// Pair `(a-1, b-1)` re-using clip `a-1`.
    ReuseClip,
    DropClip,
    DropSentence,
    DropBoth,
}

#[derive(Debug, Clone, Copy)]
struct Back {
    mv: Move,
    from: Tail,
}

struct Table {
    cols: usize,
    cost: Vec<f64>,
    back: Vec<Option<Back>>,
}

impl Table {
    fn new(rows: usize, cols: usize) -> Self {
        let n = (rows + 1) * (cols + 1) * 4;
        Self {
            cols: cols + 1,
            cost: vec![f64::INFINITY; n],
            back: vec![None; n],
        }
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, t: Tail) -> usize {
        (a * self.cols + b) * 4 + t as usize
    }

    #[inline]
    fn get(&self, a: usize, b: usize, t: Tail) -> f64 {
        self.cost[self.idx(a, b, t)]
    }
}

/// Running minimum that keeps the first candidate on ties.
struct Best {
    cost: f64,
    back: Option<Back>,
}

impl Best {
    fn new() -> Self {
        Self {
            cost: f64::INFINITY,
            back: None,
        }
    }

    #[inline]
    fn offer(&mut self, cost: f64, mv: Move, from: Tail) {
        if cost < self.cost {
            self.cost = cost;
            self.back = Some(Back { mv, from });
        }
    }
}

/// Minimal-cost monotone alignment where each clip is matched or dropped at
/// `drops.clip`, and each sentence is matched or dropped at `drops.sentence`.
///
/// With both drop costs infinite this returns the same cost as
/// [`super::dtw_align`]. Ties prefer a match, then dropping a sentence, then
/// dropping a clip, then dropping both; among matches the diagonal
/// predecessor wins.
pub fn drop_dtw_align(sim: &SimilarityMatrix, drops: DropCosts) -> Alignment {
    let cost = to_cost(sim);
    let (rows, cols) = (cost.rows(), cost.cols());
    let mut table = Table::new(rows, cols);
    let start = table.idx(0, 0, Tail::Neither);
    table.cost[start] = 0.0;

    for a in 0..=rows {
        for b in 0..=cols {
            if a == 0 && b == 0 {
                continue;
            }

            if a > 0 && b > 0 {
                let d = cost.get(a - 1, b - 1);

                let mut both = Best::new();
                for t in TAILS {
                    both.offer(table.get(a - 1, b - 1, t) + d, Move::Diagonal, t);
                }
                for t in [Tail::Both, Tail::SentenceOnly] {
                    both.offer(table.get(a - 1, b, t) + d, Move::ReuseSentence, t);
                }
                for t in [Tail::Both, Tail::ClipOnly] {
                    both.offer(table.get(a, b - 1, t) + d, Move::ReuseClip, t);
                }
                store(&mut table, a, b, Tail::Both, both);

                let mut clip_only = Best::new();
                for t in TAILS.into_iter().filter(|t| t.clip_in_pair()) {
                    clip_only.offer(
                        table.get(a, b - 1, t) + drops.sentence,
                        Move::DropSentence,
                        t,
                    );
                }
                store(&mut table, a, b, Tail::ClipOnly, clip_only);

                let mut sentence_only = Best::new();
                for t in TAILS.into_iter().filter(|t| t.sentence_in_pair()) {
                    sentence_only.offer(table.get(a - 1, b, t) + drops.clip, Move::DropClip, t);
                }
                store(&mut table, a, b, Tail::SentenceOnly, sentence_only);
            }

            let mut neither = Best::new();
            if b > 0 {
                for t in TAILS.into_iter().filter(|t| !t.clip_in_pair()) {
                    neither.offer(
                        table.get(a, b - 1, t) + drops.sentence,
                        Move::DropSentence,
                        t,
                    );
                }
            }
            if a > 0 {
                for t in TAILS.into_iter().filter(|t| !t.sentence_in_pair()) {
                    neither.offer(table.get(a - 1, b, t) + drops.clip, Move::DropClip, t);
                }
            }
            if a > 0 && b > 0 {
                let both_drops = drops.clip + drops.sentence;
                for t in TAILS {
                    neither.offer(table.get(a - 1, b - 1, t) + both_drops, Move::DropBoth, t);
                }
            }
            store(&mut table, a, b, Tail::Neither, neither);
        }
    }

    let mut end = Tail::Both;
    for t in TAILS {
        if table.get(rows, cols, t) < table.get(rows, cols, end) {
            end = t;
        }
    }
    let total_cost = table.get(rows, cols, end);

    let mut assignments = Vec::with_capacity(rows + cols);
    let mut dropped_clips = BTreeSet::new();
    let mut dropped_sentences = BTreeSet::new();
    let (mut a, mut b, mut tail) = (rows, cols, end);
    while let Some(back) = table.back[table.idx(a, b, tail)] {
        match back.mv {
            Move::Diagonal => {
                assignments.push(Assignment::new(b - 1, a - 1));
                a -= 1;
                b -= 1;
            }
            Move::ReuseSentence => {
                assignments.push(Assignment::new(b - 1, a - 1));
                a -= 1;
            }
            Move::ReuseClip => {
                assignments.push(Assignment::new(b - 1, a - 1));
                b -= 1;
            }
            Move::DropClip => {
                dropped_clips.insert(a - 1);
                a -= 1;
            }
            Move::DropSentence => {
                dropped_sentences.insert(b - 1);
                b -= 1;
            }
            Move::DropBoth => {
                dropped_clips.insert(a - 1);
                dropped_sentences.insert(b - 1);
                a -= 1;
                b -= 1;
            }
        }
        tail = back.from;
    }
    debug_assert_eq!((a, b, tail), (0, 0, Tail::Neither));
    assignments.reverse();

    Alignment {
        clip_count: rows,
        sentence_count: cols,
        assignments,
        dropped_sentences,
        dropped_clips,
        total_cost,
    }
}

fn store(table: &mut Table, a: usize, b: usize, t: Tail, best: Best) {
    let i = table.idx(a, b, t);
    table.cost[i] = best.cost;
    table.back[i] = best.back;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{alignment_cost, dtw_align};
    use approx::assert_abs_diff_eq;

    fn sim(rows: &[Vec<f64>]) -> SimilarityMatrix {
        SimilarityMatrix::from_rows(rows).unwrap()
    }

    fn costs(clip: f64, sentence: f64) -> DropCosts {
        DropCosts::new(clip, sentence).unwrap()
    }

    #[test]
    fn match_beats_drop_both() {
        let a = drop_dtw_align(&sim(&[vec![1.0]]), costs(0.5, 0.5));
        assert_eq!(a.assignments, vec![Assignment::new(0, 0)]);
        assert_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn drop_both_beats_bad_match() {
        let a = drop_dtw_align(&sim(&[vec![-1.0]]), costs(0.5, 0.5));
        assert!(a.assignments.is_empty());
        assert_eq!(a.dropped_clips, BTreeSet::from([0]));
        assert_eq!(a.dropped_sentences, BTreeSet::from([0]));
        assert_eq!(a.total_cost, 1.0);
    }

    #[test]
    fn two_by_two_diagonal() {
        let a = drop_dtw_align(&sim(&[vec![0.9, -0.8], vec![-0.8, 0.9]]), costs(0.4, 0.4));
        assert_eq!(
            a.assignments,
            vec![Assignment::new(0, 0), Assignment::new(1, 1)]
        );
        assert!(a.dropped_clips.is_empty() && a.dropped_sentences.is_empty());
        assert_abs_diff_eq!(a.total_cost, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn one_clip_drops_extra_sentence() {
        let s = sim(&[vec![0.5, 0.5]]);
        let a = drop_dtw_align(&s, costs(f64::INFINITY, 0.1));
        assert_abs_diff_eq!(a.total_cost, 0.6, epsilon = 1e-12);
        assert_eq!(a.assignments.len(), 1);
        assert_eq!(a.dropped_sentences.len(), 1);
        assert!(a.dropped_clips.is_empty());
    }

    #[test]
    fn sentence_spans_a_dropped_clip() {
        // Clip 1 is noise; sentence 0 covers clips 0 and 2.
        let s = sim(&[vec![0.9], vec![-1.0], vec![0.9]]);
        let a = drop_dtw_align(&s, costs(0.5, f64::INFINITY));
        assert_eq!(
            a.assignments,
            vec![Assignment::new(0, 0), Assignment::new(0, 2)]
        );
        assert_eq!(a.dropped_clips, BTreeSet::from([1]));
        assert_abs_diff_eq!(a.total_cost, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn disabled_drops_match_dtw() {
        let s = sim(&[
            vec![0.2, 0.9, -0.3],
            vec![0.5, 0.1, 0.7],
            vec![-0.9, 0.4, 0.6],
            vec![0.3, 0.3, 0.3],
        ]);
        let a = drop_dtw_align(&s, DropCosts::disabled());
        let d = dtw_align(&s);
        assert_eq!(a.total_cost, d.total_cost);
        assert_eq!(a.assignments, d.assignments);
        assert!(a.dropped_clips.is_empty() && a.dropped_sentences.is_empty());
    }

    #[test]
    fn zero_drop_costs_drop_everything_bad() {
        let s = sim(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        let a = drop_dtw_align(&s, costs(0.0, 0.0));
        assert_eq!(a.total_cost, 0.0);
        a.validate().unwrap();
    }

    #[test]
    fn accounting_and_validity_on_fixed_instance() {
        let s = sim(&[
            vec![0.1, 0.8, -0.2, 0.0],
            vec![0.9, -0.5, 0.3, 0.2],
            vec![-0.4, 0.6, 0.95, -0.1],
        ]);
        let drops = costs(0.6, 0.3);
        let a = drop_dtw_align(&s, drops);
        a.validate().unwrap();
        assert_abs_diff_eq!(
            a.total_cost,
            alignment_cost(&a, &to_cost(&s), drops),
            epsilon = 1e-9
        );
    }
}
