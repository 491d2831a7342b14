//! Job-shop instances, schedules and the cost-from-partial evaluator.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, Violation};
use crate::opset::OpSet;

/// Time in integer units. Signed so lateness values fit the same type.
pub type Time = i64;

/// Operation `position` of job `job`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperationId {
    pub job: usize,
    pub position: usize,
}

impl OperationId {
    pub const fn new(job: usize, position: usize) -> Self {
        OperationId { job, position }
    }
}

impl fmt::Display for OperationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O{}.{}", self.job, self.position)
    }
}

/// A job-shop instance: every job visits `n_machines` operations in order.
///
/// Operations are stored densely; the flat index of `O(j, k)` is
/// `j * n_machines + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    name: String,
    n_jobs: usize,
    n_machines: usize,
    machines: Vec<usize>,
    durations: Vec<Time>,
    machine_ops: Vec<Vec<usize>>,
    job_tail_work: Vec<Time>,
}

impl Instance {
    /// Builds an instance from per-job `(machine, duration)` rows.
    pub fn new(name: impl Into<String>, n_machines: usize, jobs: &[Vec<(usize, Time)>]) -> Result<Self> {
        if jobs.is_empty() || n_machines == 0 {
            return Err(Error::InvalidArgument(
                "an instance needs at least one job and one machine".into(),
            ));
        }
        let n_jobs = jobs.len();
        let mut machines = Vec::with_capacity(n_jobs * n_machines);
        let mut durations = Vec::with_capacity(n_jobs * n_machines);
        for (j, row) in jobs.iter().enumerate() {
            if row.len() != n_machines {
                return Err(Error::InvalidArgument(format!(
                    "job {j} has {} operations, expected {n_machines}",
                    row.len()
                )));
            }
            for &(m, d) in row {
                if m >= n_machines {
                    return Err(Error::InvalidArgument(format!(
                        "machine index {m} out of range"
                    )));
                }
                if d < 1 {
                    return Err(Error::InvalidArgument(format!(
                        "duration {d} of job {j} must be at least 1"
                    )));
                }
                machines.push(m);
                durations.push(d);
            }
        }
        let mut machine_ops = vec![Vec::new(); n_machines];
        for (idx, &m) in machines.iter().enumerate() {
            machine_ops[m].push(idx);
        }
        let mut job_tail_work = vec![0; n_jobs * n_machines];
        for j in 0..n_jobs {
            let mut acc = 0;
            for k in (0..n_machines).rev() {
                job_tail_work[j * n_machines + k] = acc;
                acc += durations[j * n_machines + k];
            }
        }
        Ok(Instance {
            name: name.into(),
            n_jobs,
            n_machines,
            machines,
            durations,
            machine_ops,
            job_tail_work,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn n_jobs(&self) -> usize {
        self.n_jobs
    }

    pub fn n_machines(&self) -> usize {
        self.n_machines
    }

    pub fn n_ops(&self) -> usize {
        self.machines.len()
    }

    #[inline]
    pub fn index(&self, op: OperationId) -> usize {
        op.job * self.n_machines + op.position
    }

    #[inline]
    pub fn op(&self, idx: usize) -> OperationId {
        OperationId::new(idx / self.n_machines, idx % self.n_machines)
    }

    pub fn contains(&self, op: OperationId) -> bool {
        op.job < self.n_jobs && op.position < self.n_machines
    }

    #[inline]
    pub fn machine_of(&self, op: OperationId) -> usize {
        self.machines[self.index(op)]
    }

    #[inline]
    pub fn duration_of(&self, op: OperationId) -> Time {
        self.durations[self.index(op)]
    }

    /// Machine of every operation, by flat index.
    pub fn machines(&self) -> &[usize] {
        &self.machines
    }

    /// Duration of every operation, by flat index.
    pub fn durations(&self) -> &[Time] {
        &self.durations
    }

    /// Flat indices of the operations processed on `machine`, in job order.
    pub fn machine_ops(&self, machine: usize) -> &[usize] {
        &self.machine_ops[machine]
    }

    /// Job predecessor of the operation at flat index `idx`.
    #[inline]
    pub fn pred_index(&self, idx: usize) -> Option<usize> {
        (!idx.is_multiple_of(self.n_machines)).then(|| idx - 1)
    }

    #[inline]
    pub fn succ_index(&self, idx: usize) -> Option<usize> {
        (idx % self.n_machines != self.n_machines - 1).then(|| idx + 1)
    }

    pub fn pred(&self, op: OperationId) -> Option<OperationId> {
        (op.position > 0).then(|| OperationId::new(op.job, op.position - 1))
    }

    /// Work that follows the operation at `idx` within its job.
    #[inline]
    pub fn job_tail_work(&self, idx: usize) -> Time {
        self.job_tail_work[idx]
    }

    pub fn total_duration(&self) -> Time {
        self.durations.iter().sum()
    }

    pub fn ops(&self) -> impl Iterator<Item = OperationId> + '_ {
        (0..self.n_ops()).map(|i| self.op(i))
    }

    /// Parses the JSPLIB "standard" format.
    ///
    /// A comment of the form `# instance <name>` sets the instance name.
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = String::new();
        let mut data = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if name.is_empty() {
                    if let Some(n) = comment.trim().strip_prefix("instance ") {
                        name = n.trim().to_string();
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            data.push((i + 1, line));
        }
        let mut lines = data.into_iter();
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header line \"n m\"".into(),
        })?;
        let dims = parse_ints(hline, header)?;
        if dims.len() != 2 || dims[0] < 1 || dims[1] < 1 {
            return Err(Error::Parse {
                line: hline,
                message: format!("malformed header {header:?}, expected two positive integers"),
            });
        }
        let (n, m) = (dims[0] as usize, dims[1] as usize);
        let mut jobs = Vec::with_capacity(n);
        for j in 0..n {
            let (lno, line) = lines.next().ok_or(Error::Parse {
                line: text.lines().count(),
                message: format!("expected {n} job lines, found {j}"),
            })?;
            let values = parse_ints(lno, line)?;
            if values.len() != 2 * m {
                return Err(Error::Parse {
                    line: lno,
                    message: format!(
                        "job {j} has {} values, expected {} machine/duration pairs",
                        values.len(),
                        m
                    ),
                });
            }
            let mut row = Vec::with_capacity(m);
            for pair in values.chunks(2) {
                let (mach, dur) = (pair[0], pair[1]);
                if mach < 0 || mach as usize >= m {
                    return Err(Error::Parse {
                        line: lno,
                        message: format!("machine index {mach} out of range"),
                    });
                }
                if dur < 0 {
                    return Err(Error::Parse {
                        line: lno,
                        message: format!("negative duration {dur}"),
                    });
                }
                if dur == 0 {
                    return Err(Error::Parse {
                        line: lno,
                        message: "zero duration is not supported".into(),
                    });
                }
                row.push((mach as usize, dur));
            }
            jobs.push(row);
        }
        if let Some((lno, _)) = lines.next() {
            return Err(Error::Parse {
                line: lno,
                message: "unexpected data after the last job".into(),
            });
        }
        Instance::new(name, m, &jobs)
    }

    /// Reads an instance file; the name falls back to the file stem.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut inst = Instance::parse(&text)?;
        if inst.name.is_empty() {
            if let Some(stem) = path.file_stem() {
                inst.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(inst)
    }

    /// Writes the instance in the same format `parse` reads.
    pub fn to_jsplib(&self) -> String {
        let mut out = String::new();
        if !self.name.is_empty() {
            out.push_str(&format!("# instance {}\n", self.name));
        }
        out.push_str(&format!("{} {}\n", self.n_jobs, self.n_machines));
        for j in 0..self.n_jobs {
            let row: Vec<String> = (0..self.n_machines)
                .map(|k| {
                    let idx = j * self.n_machines + k;
                    format!("{} {}", self.machines[idx], self.durations[idx])
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Random instance: each job visits every machine once in uniform random
    /// order; durations are uniform on `[duration_lo, duration_hi]`.
    pub fn random(
        n_jobs: usize,
        n_machines: usize,
        seed: u64,
        duration_lo: Time,
        duration_hi: Time,
    ) -> Result<Self> {
        if n_jobs < 1 || n_machines < 1 {
            return Err(Error::InvalidArgument(
                "job and machine counts must be at least 1".into(),
            ));
        }
        if duration_lo < 1 || duration_lo > duration_hi {
            return Err(Error::InvalidArgument(format!(
                "duration bounds [{duration_lo}, {duration_hi}] must satisfy 1 <= lo <= hi"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut jobs = Vec::with_capacity(n_jobs);
        for _ in 0..n_jobs {
            let mut order: Vec<usize> = (0..n_machines).collect();
            order.shuffle(&mut rng);
            jobs.push(
                order
                    .into_iter()
                    .map(|m| (m, rng.gen_range(duration_lo..=duration_hi)))
                    .collect(),
            );
        }
        Instance::new(format!("rand{n_jobs}x{n_machines}_s{seed}"), n_machines, &jobs)
    }

    /// Remaining-work trailer of `op`.
    ///
    /// The machine component sums durations of the other operations on
    /// `op`'s machine that are not in `done`.
    pub fn trailer(&self, op: OperationId, mode: TrailerMode, done: &OpSet) -> Time {
        let idx = self.index(op);
        let job = self.job_tail_work[idx];
        let machine = || {
            self.machine_ops[self.machines[idx]]
                .iter()
                .filter(|&&o| o != idx && !done.contains(o))
                .map(|&o| self.durations[o])
                .sum::<Time>()
        };
        match mode {
            TrailerMode::Job => job,
            TrailerMode::Machine => machine(),
            TrailerMode::Max => job.max(machine()),
        }
    }
}

fn parse_ints(line_no: usize, line: &str) -> Result<Vec<i64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<i64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("expected an integer, found {tok:?}"),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrailerMode {
    Job,
    Machine,
    Max,
}

/// An ordered list of distinct operations, possibly partial.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpOrder(Vec<OperationId>);

impl OpOrder {
    pub fn new(ops: Vec<OperationId>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(ops.len());
        for &op in &ops {
            if !seen.insert(op) {
                return Err(Error::AlreadyScheduled(op));
            }
        }
        Ok(OpOrder(ops))
    }

    pub fn from_indices(inst: &Instance, idx: &[usize]) -> Result<Self> {
        OpOrder::new(idx.iter().map(|&i| inst.op(i)).collect())
    }

    pub fn as_slice(&self) -> &[OperationId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<OperationId> {
        self.0
    }
}

/// Start and completion times of every operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    n_machines: usize,
    start: Vec<Time>,
    completion: Vec<Time>,
    makespan: Time,
}

impl Schedule {
    /// Derives completions and makespan from start times indexed by flat op index.
    pub fn from_starts(inst: &Instance, start: Vec<Time>) -> Result<Self> {
        if start.len() != inst.n_ops() {
            return Err(Error::InvalidArgument(format!(
                "{} start times for {} operations",
                start.len(),
                inst.n_ops()
            )));
        }
        Ok(Schedule::with_durations(inst.n_machines(), inst.durations(), start))
    }

    pub(crate) fn with_durations(ops_per_job: usize, durations: &[Time], start: Vec<Time>) -> Self {
        let completion: Vec<Time> = start.iter().zip(durations).map(|(s, d)| s + d).collect();
        let makespan = completion.iter().copied().max().unwrap_or(0);
        Schedule {
            n_machines: ops_per_job,
            start,
            completion,
            makespan,
        }
    }

    /// Raw constructor; no consistency checks. Intended for validation tests.
    pub fn from_parts(n_machines: usize, start: Vec<Time>, completion: Vec<Time>, makespan: Time) -> Self {
        Schedule {
            n_machines,
            start,
            completion,
            makespan,
        }
    }

    pub fn makespan(&self) -> Time {
        self.makespan
    }

    pub fn start(&self, op: OperationId) -> Time {
        self.start[op.job * self.n_machines + op.position]
    }

    pub fn completion(&self, op: OperationId) -> Time {
        self.completion[op.job * self.n_machines + op.position]
    }

    pub fn starts(&self) -> &[Time] {
        &self.start
    }

    pub fn completions(&self) -> &[Time] {
        &self.completion
    }

    /// Operations of every machine sorted by start time.
    pub fn machine_orders(&self, inst: &Instance) -> Vec<Vec<OperationId>> {
        (0..inst.n_machines())
            .map(|m| {
                let mut ops = inst.machine_ops(m).to_vec();
                ops.sort_by_key(|&o| (self.start[o], o));
                ops.into_iter().map(|o| inst.op(o)).collect()
            })
            .collect()
    }

    /// All operations sorted by start time. Feeding this back through
    /// [`cost_from_partial`] yields a makespan no larger than this schedule's.
    pub fn op_order(&self, inst: &Instance) -> OpOrder {
        let mut idx: Vec<usize> = (0..self.start.len()).collect();
        idx.sort_by_key(|&o| (self.start[o], o));
        OpOrder(idx.into_iter().map(|o| inst.op(o)).collect())
    }
}

/// Result of evaluating a (partial) order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialCost {
    pub makespan: Time,
    pub start: BTreeMap<OperationId, Time>,
    pub completion: BTreeMap<OperationId, Time>,
    pub machine_finish: Vec<Time>,
}

/// Evaluates `order` left to right, starting each operation as soon as its
/// machine and job predecessor allow.
///
/// `machine_finish` defaults to all zeros; `done` supplies completion times of
/// operations finished before `order` begins.
pub fn cost_from_partial(
    inst: &Instance,
    order: &OpOrder,
    machine_finish: Option<&[Time]>,
    done: &BTreeMap<OperationId, Time>,
) -> Result<PartialCost> {
    let mut mf = match machine_finish {
        Some(v) if v.len() != inst.n_machines() => {
            return Err(Error::InvalidArgument(format!(
                "machine finish vector has {} entries, expected {}",
                v.len(),
                inst.n_machines()
            )))
        }
        Some(v) => v.to_vec(),
        None => vec![0; inst.n_machines()],
    };
    let mut start = BTreeMap::new();
    let mut completion = BTreeMap::new();
    for &x in order.as_slice() {
        if !inst.contains(x) {
            return Err(Error::InvalidArgument(format!("{x} is not in the instance")));
        }
        let m = inst.machine_of(x);
        let mut s = mf[m];
        if let Some(p) = inst.pred(x) {
            let ready = completion
                .get(&p)
                .or_else(|| done.get(&p))
                .ok_or(Error::MissingPrerequisite { op: x, missing: p })?;
            s = s.max(*ready);
        }
        let c = s + inst.duration_of(x);
        start.insert(x, s);
        completion.insert(x, c);
        mf[m] = c;
    }
    Ok(PartialCost {
        makespan: mf.iter().copied().max().unwrap_or(0),
        start,
        completion,
        machine_finish: mf,
    })
}

/// Semi-active schedule of a complete order given as flat indices.
pub fn schedule_from_order(inst: &Instance, order: &[usize]) -> Result<Schedule> {
    if order.len() != inst.n_ops() {
        return Err(Error::InvalidArgument(format!(
            "order lists {} of {} operations",
            order.len(),
            inst.n_ops()
        )));
    }
    let mut mf = vec![0; inst.n_machines()];
    let mut start = vec![-1; inst.n_ops()];
    let mut fin = vec![-1; inst.n_ops()];
    for &x in order {
        if start[x] >= 0 {
            return Err(Error::AlreadyScheduled(inst.op(x)));
        }
        let m = inst.machines()[x];
        let mut s = mf[m];
        if let Some(p) = inst.pred_index(x) {
            if fin[p] < 0 {
                return Err(Error::MissingPrerequisite {
                    op: inst.op(x),
                    missing: inst.op(p),
                });
            }
            s = s.max(fin[p]);
        }
        start[x] = s;
        fin[x] = s + inst.durations()[x];
        mf[m] = fin[x];
    }
    Schedule::from_starts(inst, start)
}

/// Checks job precedence, machine exclusivity and completion arithmetic.
pub fn validate_schedule(inst: &Instance, schedule: &Schedule) -> std::result::Result<(), Violation> {
    let n = inst.n_ops();
    if schedule.start.len() != n || schedule.completion.len() != n {
        return Err(Violation::Shape {
            expected: n,
            found: schedule.start.len(),
        });
    }
    for idx in 0..n {
        let op = inst.op(idx);
        if schedule.start[idx] < 0 {
            return Err(Violation::NegativeStart(op));
        }
        if schedule.completion[idx] != schedule.start[idx] + inst.durations()[idx] {
            return Err(Violation::Completion(op));
        }
    }
    let actual = schedule.completion.iter().copied().max().unwrap_or(0);
    if actual != schedule.makespan {
        return Err(Violation::Makespan {
            recorded: schedule.makespan,
            actual,
        });
    }
    for m in 0..inst.n_machines() {
        let mut ops = inst.machine_ops(m).to_vec();
        ops.sort_by_key(|&o| (schedule.start[o], o));
        for pair in ops.windows(2) {
            if schedule.start[pair[1]] < schedule.completion[pair[0]] {
                return Err(Violation::Overlap {
                    machine: m,
                    first: inst.op(pair[0]),
                    second: inst.op(pair[1]),
                });
            }
        }
    }
    for idx in 0..n {
        if let Some(p) = inst.pred_index(idx) {
            if schedule.start[idx] < schedule.completion[p] {
                return Err(Violation::Precedence {
                    before: inst.op(p),
                    after: inst.op(idx),
                });
            }
        }
    }
    Ok(())
}
