//! Finite Hales–Jewett machinery: monochromatic combinatorial lines in the
//! cube A^N, exact sufficiency certification for small instances, and the
//! trace colorings that turn membership predicates into cube colorings.
//!
//! Points of A^N are base-p integers (first symbol most significant), which
//! makes index order coincide with canonical word order. A combinatorial
//! line is given by a variable word of length N: its points are the p
//! substitutions, whose indices are fixed + a·mask for letter id a.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::word::{Alphabet, Letter, Symbol, VariableWord, Word};

/// Hard cap on p^N; beyond desk scale the exhaustive engines stop making
/// sense long before memory does.
pub const MAX_POINTS: usize = 4096;

/// Split depth for the certification search: the colorings of the first few
/// points partition the space into independent tasks. The depth is fixed (it
/// must not depend on the worker count) so that per-task budgets, and with
/// them every outcome, are identical no matter how many threads run.
const SPLIT_DEPTH: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum HjError {
    #[error("p, q and N must all be at least 1")]
    BadParameters,
    #[error("cube has {points} points, more than the supported {MAX_POINTS}")]
    TooManyPoints { points: usize },
    #[error("coloring must assign {expected} points but has {got} entries")]
    WrongLength { expected: usize, got: usize },
    #[error("color {color} out of range for {q} colors")]
    ColorOutOfRange { color: u32, q: usize },
    #[error(
        "search budget exhausted after covering a fraction {explored:.6} of the reduced coloring space"
    )]
    BudgetExceeded { explored: f64 },
}

/// A total coloring of A^N with q colors, stored densely by point index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeColoring {
    p: usize,
    n: usize,
    q: usize,
    colors: Vec<u32>,
}

impl CubeColoring {
    pub fn new(p: usize, n: usize, q: usize, colors: Vec<u32>) -> Result<Self, HjError> {
        if p == 0 || q == 0 || n == 0 {
            return Err(HjError::BadParameters);
        }
        let points = checked_points(p, n)?;
        if colors.len() != points {
            return Err(HjError::WrongLength { expected: points, got: colors.len() });
        }
        if let Some(&c) = colors.iter().find(|&&c| c as usize >= q) {
            return Err(HjError::ColorOutOfRange { color: c, q });
        }
        Ok(CubeColoring { p, n, q, colors })
    }

    pub fn from_fn(
        p: usize,
        n: usize,
        q: usize,
        mut f: impl FnMut(usize) -> u32,
    ) -> Result<Self, HjError> {
        if p == 0 || q == 0 || n == 0 {
            return Err(HjError::BadParameters);
        }
        let points = checked_points(p, n)?;
        CubeColoring::new(p, n, q, (0..points).map(&mut f).collect())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn num_points(&self) -> usize {
        self.colors.len()
    }

    pub fn color(&self, point: usize) -> u32 {
        self.colors[point]
    }

    /// The constant word at a point index, digits most significant first.
    pub fn point_word(&self, point: usize, alphabet: &Alphabet) -> Word {
        debug_assert_eq!(alphabet.len(), self.p);
        let mut symbols = vec![Symbol::Variable; self.n];
        let mut rest = point;
        for slot in (0..self.n).rev() {
            symbols[slot] = Symbol::Letter(Letter((rest % self.p) as u8));
            rest /= self.p;
        }
        debug_assert_eq!(rest, 0);
        Word::from_symbols(symbols)
    }
}

fn checked_points(p: usize, n: usize) -> Result<usize, HjError> {
    let mut points = 1usize;
    for _ in 0..n {
        points = points.saturating_mul(p);
        if points > MAX_POINTS {
            return Err(HjError::TooManyPoints { points });
        }
    }
    Ok(points)
}

/// A line as (fixed part, variable mask): point of letter a is fixed+a·mask.
#[derive(Debug, Clone, Copy)]
struct Line {
    fixed: usize,
    mask: usize,
}

impl Line {
    fn point(&self, a: usize) -> usize {
        self.fixed + a * self.mask
    }
}

/// All lines of the cube, in canonical generator order (variable symbol
/// before letters at every slot).
fn enumerate_lines(p: usize, n: usize) -> Vec<Line> {
    let mut out = Vec::new();
    let mut weights = vec![0usize; n];
    let mut w = 1;
    for slot in (0..n).rev() {
        weights[slot] = w;
        w *= p;
    }
    fn rec(slot: usize, n: usize, p: usize, weights: &[usize], fixed: usize, mask: usize, out: &mut Vec<Line>) {
        if slot == n {
            if mask != 0 {
                out.push(Line { fixed, mask });
            }
            return;
        }
        rec(slot + 1, n, p, weights, fixed, mask + weights[slot], out);
        for a in 0..p {
            rec(slot + 1, n, p, weights, fixed + a * weights[slot], mask, out);
        }
    }
    rec(0, n, p, &weights, 0, 0, &mut out);
    out
}

fn generator_of_line(line: &Line, p: usize, n: usize) -> VariableWord {
    let mut weights = vec![1usize; n];
    for slot in (0..n.saturating_sub(1)).rev() {
        weights[slot] = weights[slot + 1] * p;
    }
    let mut symbols = Vec::with_capacity(n);
    let mut fixed = line.fixed;
    let mut mask = line.mask;
    for &w in &weights {
        // the remaining mask is a sum of distinct weights, so it reaches w
        // exactly when this slot is one of the variable slots
        if mask >= w {
            symbols.push(Symbol::Variable);
            mask -= w;
        } else {
            let digit = fixed / w;
            symbols.push(Symbol::Letter(Letter(digit as u8)));
            fixed -= digit * w;
        }
    }
    VariableWord::new(Word::from_symbols(symbols)).expect("mask nonzero means a variable slot")
}

/// The least monochromatic line of the coloring (variable slots preferred
/// early), or `None` when no line is monochromatic.
pub fn find_line(coloring: &CubeColoring) -> Option<(VariableWord, u32)> {
    for line in enumerate_lines(coloring.p, coloring.n) {
        let color = coloring.color(line.point(0));
        if (1..coloring.p).all(|a| coloring.color(line.point(a)) == color) {
            let generator = generator_of_line(&line, coloring.p, coloring.n);
            // the contract behind every caller: p points, one color
            let points: Vec<usize> = (0..coloring.p).map(|a| line.point(a)).collect();
            assert_eq!(points.len(), coloring.p);
            assert!(points.iter().all(|&pt| coloring.color(pt) == color));
            return Some((generator, color));
        }
    }
    None
}

/// The least line all of whose points carry the given color, if any.
pub fn find_line_colored(coloring: &CubeColoring, color: u32) -> Option<VariableWord> {
    enumerate_lines(coloring.p, coloring.n)
        .into_iter()
        .find(|line| (0..coloring.p).all(|a| coloring.color(line.point(a)) == color))
        .map(|line| generator_of_line(&line, coloring.p, coloring.n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HjVerdict {
    /// Every q-coloring of A^N has a monochromatic line.
    Sufficient,
    /// An explicit line-free coloring (in color-relabeled canonical form).
    Counterexample(CubeColoring),
}

struct SearchSpace {
    p: usize,
    q: usize,
    points: usize,
    /// lines_by_max[i]: lines whose largest point is i, checkable as soon as
    /// point i is colored.
    lines_by_max: Vec<Vec<Line>>,
}

impl SearchSpace {
    fn new(p: usize, q: usize, n: usize) -> Result<Self, HjError> {
        let points = checked_points(p, n)?;
        let mut lines_by_max = vec![Vec::new(); points];
        for line in enumerate_lines(p, n) {
            lines_by_max[line.point(p - 1)].push(line);
        }
        Ok(SearchSpace { p, q, points, lines_by_max })
    }

    /// True iff coloring point `i` with the colors in `colors[..=i]` closes a
    /// monochromatic line.
    fn closes_mono_line(&self, colors: &[u32], i: usize) -> bool {
        self.lines_by_max[i].iter().any(|line| {
            let c = colors[line.point(0)];
            (1..self.p).all(|a| colors[line.point(a)] == c)
        })
    }
}

/// One DFS task: a partial coloring of the first points, its relabeling
/// state (how many colors appear so far), and its share of the search tree.
struct Task {
    colors: Vec<u32>,
    depth: usize,
    used: u32,
    weight: f64,
}

/// Outcome of one task's bounded DFS.
enum TaskOutcome {
    Exhausted { covered: f64 },
    Found { colors: Vec<u32>, covered: f64 },
    OutOfBudget { covered: f64 },
}

fn run_task(space: &SearchSpace, task: &Task, budget: u64) -> TaskOutcome {
    let mut colors = task.colors.clone();
    let mut covered = 0.0;
    let mut nodes: u64 = 0;
    let found = dfs(
        space,
        &mut colors,
        task.depth,
        task.used,
        task.weight,
        budget,
        &mut nodes,
        &mut covered,
    );
    match found {
        DfsResult::Found => TaskOutcome::Found { colors, covered },
        DfsResult::Exhausted => TaskOutcome::Exhausted { covered },
        DfsResult::OutOfBudget => TaskOutcome::OutOfBudget { covered },
    }
}

enum DfsResult {
    Found,
    Exhausted,
    OutOfBudget,
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    space: &SearchSpace,
    colors: &mut Vec<u32>,
    depth: usize,
    used: u32,
    weight: f64,
    budget: u64,
    nodes: &mut u64,
    covered: &mut f64,
) -> DfsResult {
    if depth == space.points {
        *covered += weight;
        return DfsResult::Found;
    }
    // a fresh color may only follow all smaller ones (relabeling canonical
    // form); at the first point this pins color 0
    let branches = (used as usize + 1).min(space.q);
    let branch_weight = weight / branches as f64;
    for c in 0..branches as u32 {
        *nodes += 1;
        if *nodes > budget {
            return DfsResult::OutOfBudget;
        }
        colors.push(c);
        if space.closes_mono_line(colors, depth) {
            *covered += branch_weight;
        } else {
            match dfs(
                space,
                colors,
                depth + 1,
                used.max(c + 1),
                branch_weight,
                budget,
                nodes,
                covered,
            ) {
                DfsResult::Found => return DfsResult::Found,
                DfsResult::OutOfBudget => return DfsResult::OutOfBudget,
                DfsResult::Exhausted => {}
            }
        }
        colors.pop();
    }
    DfsResult::Exhausted
}

/// Enumerates the split-depth task prefixes in canonical order, accounting
/// pruned prefixes into `covered`.
fn split_tasks(space: &SearchSpace, covered: &mut f64) -> Vec<Task> {
    let split = SPLIT_DEPTH.min(space.points.saturating_sub(1)).max(1);
    let mut tasks = Vec::new();
    let mut colors = Vec::new();
    fn rec(
        space: &SearchSpace,
        split: usize,
        colors: &mut Vec<u32>,
        used: u32,
        weight: f64,
        tasks: &mut Vec<Task>,
        covered: &mut f64,
    ) {
        if colors.len() == split {
            tasks.push(Task { colors: colors.clone(), depth: split, used, weight });
            return;
        }
        let depth = colors.len();
        let branches = (used as usize + 1).min(space.q);
        let branch_weight = weight / branches as f64;
        for c in 0..branches as u32 {
            colors.push(c);
            if space.closes_mono_line(colors, depth) {
                *covered += branch_weight;
            } else {
                rec(space, split, colors, used.max(c + 1), branch_weight, tasks, covered);
            }
            colors.pop();
        }
    }
    rec(space, split, &mut colors, 0, 1.0, &mut tasks, covered);
    tasks
}

/// Decides whether every q-coloring of A^N (|A| = p) has a monochromatic
/// line, by exhaustive search over colorings in color-relabeled canonical
/// form with early pruning. Returns the least line-free coloring otherwise.
///
/// The search is split into fixed tasks with equal budget shares, so the
/// verdict — including budget exhaustion — does not depend on `threads`.
pub fn hj_certify(
    p: usize,
    q: usize,
    n: usize,
    budget: u64,
    threads: usize,
) -> Result<HjVerdict, HjError> {
    if p == 0 || q == 0 || n == 0 {
        return Err(HjError::BadParameters);
    }
    let space = SearchSpace::new(p, q, n)?;
    let mut covered_prefix = 0.0;
    let tasks = split_tasks(&space, &mut covered_prefix);
    if tasks.is_empty() {
        // every prefix already closed a line
        return Ok(HjVerdict::Sufficient);
    }
    let budget_per_task = (budget / tasks.len() as u64).max(1);

    let outcomes: Vec<TaskOutcome> = if threads <= 1 || tasks.len() == 1 {
        tasks.iter().map(|t| run_task(&space, t, budget_per_task)).collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<TaskOutcome>>> =
            tasks.iter().map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..threads.min(tasks.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= tasks.len() {
                        break;
                    }
                    let outcome = run_task(&space, &tasks[i], budget_per_task);
                    *slots[i].lock().unwrap() = Some(outcome);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("every task ran"))
            .collect()
    };

    let mut covered = covered_prefix;
    let mut first_found: Option<Vec<u32>> = None;
    let mut out_of_budget = false;
    for outcome in outcomes {
        match outcome {
            TaskOutcome::Exhausted { covered: c } => covered += c,
            TaskOutcome::OutOfBudget { covered: c } => {
                covered += c;
                out_of_budget = true;
            }
            TaskOutcome::Found { colors, covered: c } => {
                covered += c;
                if first_found.is_none() {
                    first_found = Some(colors);
                }
            }
        }
    }
    if let Some(colors) = first_found {
        let coloring = CubeColoring::new(p, n, q, colors)?;
        // never emit an unverified counterexample
        assert!(find_line(&coloring).is_none());
        return Ok(HjVerdict::Counterexample(coloring));
    }
    if out_of_budget {
        return Err(HjError::BudgetExceeded { explored: covered });
    }
    Ok(HjVerdict::Sufficient)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HjNumber {
    /// The least sufficient N, with a verified line-free coloring one level
    /// below (absent when N = 1).
    Found {
        n: usize,
        counterexample_below: Option<CubeColoring>,
    },
    /// No N up to max_n is certified sufficient; `budget_exhausted` tells
    /// whether that is a definite family of counterexamples or a budget death.
    Unknown { max_n: usize, budget_exhausted: bool },
}

/// Finds the least N ≤ max_n for which every q-coloring of A^N has a
/// monochromatic line.
pub fn hj_number(
    p: usize,
    q: usize,
    max_n: usize,
    budget: u64,
    threads: usize,
) -> Result<HjNumber, HjError> {
    if max_n == 0 {
        return Err(HjError::BadParameters);
    }
    let mut below = None;
    for n in 1..=max_n {
        match hj_certify(p, q, n, budget, threads) {
            Ok(HjVerdict::Sufficient) => {
                return Ok(HjNumber::Found { n, counterexample_below: below });
            }
            Ok(HjVerdict::Counterexample(c)) => below = Some(c),
            Err(HjError::BudgetExceeded { .. }) => {
                return Ok(HjNumber::Unknown { max_n, budget_exhausted: true });
            }
            Err(other) => return Err(other),
        }
    }
    Ok(HjNumber::Unknown { max_n, budget_exhausted: false })
}

/// Colors each point by the bit vector of `membership` over the contexts in
/// order: pattern(w) = (membership(u·w)) for u in contexts. Two points get
/// the same color class iff every context agrees on them.
pub fn trace_coloring<E>(
    contexts: &[Word],
    mut membership: impl FnMut(&Word) -> Result<bool, E>,
    points: &[Word],
) -> Result<BTreeMap<Word, Vec<bool>>, E> {
    let mut out = BTreeMap::new();
    for w in points {
        let mut pattern = Vec::with_capacity(contexts.len());
        for u in contexts {
            pattern.push(membership(&u.append(w))?);
        }
        out.insert(w.clone(), pattern);
    }
    Ok(out)
}
