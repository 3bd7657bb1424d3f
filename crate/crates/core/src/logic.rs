//! Two-memristor implication logic circuit.
//!
//! Netlist: M1 connects source V1 to the shared node N, M2 connects source V2
//! to N, the common resistor R connects N to source V3, and switch S1 shorts
//! N to ground. With S1 closed each device sees its source voltage directly,
//! so holding V1 = V2 = V0 inside the bistable window stores both states.
//! Opening S1 couples the devices through N and R, and the final states after
//! the next hold encode a Boolean function of the initial states.
//!
//! One operation is the phase sequence initialisation → hold → calculation →
//! hold. Inside each phase the devices are relaxed quasi-statically: solve
//! the node, apply the threshold rule to both devices at once, repeat until
//! a fixed point or a revisited state (an oscillation).

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::circuit::sig9;
use crate::device::{finite, positive, DeviceParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default phase duration, seconds. Only checked against the actuation delay.
pub const DEFAULT_PHASE_DURATION: f64 = 10e-3;

/// Initialisation level for logic 0 and logic 1, volts.
pub const INIT_LOW: f64 = 0.0;
pub const INIT_HIGH: f64 = 5.0;

/// Export code for cells where any input pair oscillated.
pub const OSCILLATION_CODE: u8 = 255;

/// Both device states, `(M1, M2)`, `true` = ON.
pub type States = (bool, bool);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicCircuit<T> {
    pub m1: DeviceParams<T>,
    pub m2: DeviceParams<T>,
    /// Common resistor between N and V3, ohms.
    pub r_common: T,
    /// Hold voltage V0 applied to both devices between operations.
    pub v_hold_level: T,
}

impl<T: Scalar> Default for LogicCircuit<T> {
    fn default() -> Self {
        Self {
            m1: DeviceParams::default(),
            m2: DeviceParams::default(),
            r_common: T::lit(220.0),
            v_hold_level: T::lit(1.9),
        }
    }
}

impl<T: Scalar> LogicCircuit<T> {
    pub fn validate(&self) -> Result<()> {
        self.m1.validate()?;
        self.m2.validate()?;
        positive("r_common", self.r_common)?;
        finite("r_common", self.r_common)?;
        finite("v_hold_level", self.v_hold_level)?;
        if !self.m1.is_bistable_at(self.v_hold_level) || !self.m2.is_bistable_at(self.v_hold_level) {
            return Err(Error::invalid(
                "v_hold_level",
                format!("{} V is not strictly inside both bistable windows", self.v_hold_level),
            ));
        }
        Ok(())
    }

    fn max_actuation(&self) -> T {
        self.m1.t_actuate.max(self.m2.t_actuate)
    }
}

/// Node voltage and the two device voltages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSolution<T> {
    pub v_n: T,
    pub v_m1: T,
    pub v_m2: T,
}

/// One-node nodal solve of the logic circuit for fixed device states.
pub fn solve_node<T: Scalar>(
    c: &LogicCircuit<T>,
    states: States,
    v1: T,
    v2: T,
    v3: T,
    switch_closed: bool,
) -> NodeSolution<T> {
    let v_n = if switch_closed {
        T::zero()
    } else {
        let g1 = c.m1.resistance(states.0).recip();
        let g2 = c.m2.resistance(states.1).recip();
        let g3 = c.r_common.recip();
        // Grouped so that swapping (M1, V1) with (M2, V2) is bit-exact.
        ((v1 * g1 + v2 * g2) + v3 * g3) / ((g1 + g2) + g3)
    };
    NodeSolution { v_n, v_m1: v1 - v_n, v_m2: v2 - v_n }
}

/// Outcome of quasi-static relaxation within one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Relaxation {
    pub states: States,
    pub oscillated: bool,
    pub iterations: usize,
}

/// Relaxes both devices under fixed sources.
///
/// Stops at a fixed point, or when an update would revisit an earlier state;
/// in that case `oscillated` is set and the state before the cycle closes is
/// returned. The state space has four elements, so at most four updates run.
pub fn relax<T: Scalar>(
    c: &LogicCircuit<T>,
    start: States,
    v1: T,
    v2: T,
    v3: T,
    switch_closed: bool,
) -> Relaxation {
    let mut seen = [start; 4];
    let mut n_seen = 1;
    let mut states = start;
    let mut iterations = 0;
    loop {
        let sol = solve_node(c, states, v1, v2, v3, switch_closed);
        let next = (c.m1.settle(states.0, sol.v_m1), c.m2.settle(states.1, sol.v_m2));
        iterations += 1;
        if next == states {
            return Relaxation { states, oscillated: false, iterations };
        }
        if seen[..n_seen].contains(&next) {
            return Relaxation { states, oscillated: true, iterations };
        }
        seen[n_seen] = next;
        n_seen += 1;
        states = next;
    }
}

/// How a phase sets V1 and V2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive<T> {
    /// Each source is `high` for input 1 and `low` for input 0.
    Inputs { low: T, high: T },
    Fixed { v1: T, v2: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase<T> {
    pub drive: Drive<T>,
    pub v3: T,
    pub switch_closed: bool,
    pub duration: T,
}

impl<T: Scalar> Phase<T> {
    pub fn hold(v0: T, duration: T) -> Self {
        Self { drive: Drive::Fixed { v1: v0, v2: v0 }, v3: T::zero(), switch_closed: true, duration }
    }

    fn sources(&self, inputs: States) -> (T, T) {
        match self.drive {
            Drive::Inputs { low, high } => {
                (if inputs.0 { high } else { low }, if inputs.1 { high } else { low })
            }
            Drive::Fixed { v1, v2 } => (v1, v2),
        }
    }
}

/// Ordered phases executed for one logic operation.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProgram<T> {
    pub phases: Vec<Phase<T>>,
}

impl<T: Scalar> PhaseProgram<T> {
    /// Initialisation (0 V / 5 V, switch closed) → hold at V0 → calculation
    /// with the switch open → hold at V0.
    pub fn canonical(v_hold_level: T, v1: T, v2: T, v3: T) -> Self {
        let duration = T::lit(DEFAULT_PHASE_DURATION);
        Self {
            phases: vec![
                Phase {
                    drive: Drive::Inputs { low: T::lit(INIT_LOW), high: T::lit(INIT_HIGH) },
                    v3: T::zero(),
                    switch_closed: true,
                    duration,
                },
                Phase::hold(v_hold_level, duration),
                Phase { drive: Drive::Fixed { v1, v2 }, v3, switch_closed: false, duration },
                Phase::hold(v_hold_level, duration),
            ],
        }
    }

    /// Checks phase shape against a circuit: nonempty, switch closed at both
    /// ends, and every phase lasting at least ten actuation delays.
    pub fn validate(&self, c: &LogicCircuit<T>) -> Result<()> {
        let (first, last) = match (self.phases.first(), self.phases.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::PhaseProgram("program has no phases".into())),
        };
        if !first.switch_closed || !last.switch_closed {
            return Err(Error::PhaseProgram("first and last phases must keep the switch closed".into()));
        }
        let min_duration = T::lit(10.0) * c.max_actuation();
        for (k, phase) in self.phases.iter().enumerate() {
            if !(phase.duration > T::zero()) {
                return Err(Error::PhaseProgram(format!("phase {k} has non-positive duration")));
            }
            if phase.duration < min_duration {
                return Err(Error::PhaseProgram(format!(
                    "phase {k} lasts {} s, shorter than 10 actuation delays ({} s)",
                    phase.duration, min_duration
                )));
            }
            let (v1, v2) = match phase.drive {
                Drive::Inputs { low, high } => (low, high),
                Drive::Fixed { v1, v2 } => (v1, v2),
            };
            finite("v1", v1)?;
            finite("v2", v2)?;
            finite("v3", phase.v3)?;
        }
        Ok(())
    }
}

/// Final device states after one operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceOutcome {
    pub s1: bool,
    pub s2: bool,
    pub oscillated: bool,
}

/// Runs a phase program from both devices OFF with initial inputs `(a, b)`.
pub fn run_sequence<T: Scalar>(c: &LogicCircuit<T>, prog: &PhaseProgram<T>, inputs: States) -> Result<SequenceOutcome> {
    c.validate()?;
    prog.validate(c)?;
    Ok(execute(c, prog, inputs))
}

fn execute<T: Scalar>(c: &LogicCircuit<T>, prog: &PhaseProgram<T>, inputs: States) -> SequenceOutcome {
    let mut states = (false, false);
    let mut oscillated = false;
    for phase in &prog.phases {
        let (v1, v2) = phase.sources(inputs);
        let r = relax(c, states, v1, v2, phase.v3, phase.switch_closed);
        states = r.states;
        oscillated |= r.oscillated;
    }
    SequenceOutcome { s1: states.0, s2: states.1, oscillated }
}

/// The four input pairs in code-bit order.
pub const INPUT_PAIRS: [States; 4] = [(false, false), (false, true), (true, false), (true, true)];

fn bit_index((a, b): States) -> usize {
    2 * usize::from(a) + usize::from(b)
}

/// Encodes final states over the four input pairs: bit `2a + b` holds the
/// final state for initial inputs `(a, b)`.
pub fn gate_code(finals: &BTreeMap<States, bool>) -> Result<u8> {
    let mut code = 0u8;
    for pair in INPUT_PAIRS {
        let bit = *finals.get(&pair).ok_or(Error::MissingInputPair(u8::from(pair.0), u8::from(pair.1)))?;
        code |= u8::from(bit) << bit_index(pair);
    }
    Ok(code)
}

/// Exchanges the roles of M1 and M2 in a code (swaps bits 1 and 2).
pub fn swap_inputs(code: u8) -> u8 {
    (code & 0b1001) | ((code & 0b0010) << 1) | ((code & 0b0100) >> 1)
}

/// The sixteen two-input Boolean functions, named after the memristor that
/// stores each input. `Imp1` is M1→M2, `Imp2` is M2→M1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Gate {
    False = 0,
    Nor = 1,
    NotImp2 = 2,
    NotM1 = 3,
    NotImp1 = 4,
    NotM2 = 5,
    Xor = 6,
    Nand = 7,
    And = 8,
    Xnor = 9,
    CopyM2 = 10,
    Imp1 = 11,
    CopyM1 = 12,
    Imp2 = 13,
    Or = 14,
    True = 15,
}

impl Gate {
    pub const ALL: [Gate; 16] = [
        Gate::False,
        Gate::Nor,
        Gate::NotImp2,
        Gate::NotM1,
        Gate::NotImp1,
        Gate::NotM2,
        Gate::Xor,
        Gate::Nand,
        Gate::And,
        Gate::Xnor,
        Gate::CopyM2,
        Gate::Imp1,
        Gate::CopyM1,
        Gate::Imp2,
        Gate::Or,
        Gate::True,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn label(self) -> &'static str {
        match self {
            Gate::False => "FALSE",
            Gate::Nor => "NOR",
            Gate::NotImp2 => "NOT(IMP_2)",
            Gate::NotM1 => "NOT(M1)",
            Gate::NotImp1 => "NOT(IMP_1)",
            Gate::NotM2 => "NOT(M2)",
            Gate::Xor => "XOR",
            Gate::Nand => "NAND",
            Gate::And => "AND",
            Gate::Xnor => "XNOR",
            Gate::CopyM2 => "COPY(M2)",
            Gate::Imp1 => "IMP_1",
            Gate::CopyM1 => "COPY(M1)",
            Gate::Imp2 => "IMP_2",
            Gate::Or => "OR",
            Gate::True => "TRUE",
        }
    }

    /// Single-character glyph used in ASCII heatmaps.
    pub fn glyph(self) -> char {
        match self {
            Gate::False => '.',
            Gate::Nor => 'r',
            Gate::NotImp2 => 'j',
            Gate::NotM1 => 'a',
            Gate::NotImp1 => 'i',
            Gate::NotM2 => 'b',
            Gate::Xor => 'x',
            Gate::Nand => 'n',
            Gate::And => '&',
            Gate::Xnor => 'e',
            Gate::CopyM2 => '2',
            Gate::Imp1 => 'I',
            Gate::CopyM1 => '1',
            Gate::Imp2 => 'J',
            Gate::Or => '|',
            Gate::True => '#',
        }
    }

    /// Output of the function for inputs `(m1, m2)`.
    pub fn eval(self, m1: bool, m2: bool) -> bool {
        self.code() >> bit_index((m1, m2)) & 1 == 1
    }

    /// Truth table in input-pair order (0,0), (0,1), (1,0), (1,1).
    pub fn truth_table(self) -> BTreeMap<States, bool> {
        INPUT_PAIRS.iter().map(|&(a, b)| ((a, b), self.eval(a, b))).collect()
    }

    /// The same function with M1 and M2 exchanged.
    pub fn swapped(self) -> Gate {
        Gate::ALL[usize::from(swap_inputs(self.code()))]
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Looks up the function realized by a code.
pub fn classify(code: u32) -> Result<Gate> {
    usize::try_from(code)
        .ok()
        .and_then(|k| Gate::ALL.get(k).copied())
        .ok_or(Error::CodeOutOfRange(code))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Register {
    M1,
    M2,
}

/// Final states of one operation evaluated for all four input pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateResult {
    /// Final `(M1, M2)` indexed by `2a + b`.
    pub finals: [States; 4],
    pub gate_m1: Gate,
    pub gate_m2: Gate,
    pub oscillated: bool,
}

impl GateResult {
    pub fn gate(&self, register: Register) -> Gate {
        match register {
            Register::M1 => self.gate_m1,
            Register::M2 => self.gate_m2,
        }
    }

    /// Code as exported: the gate code, or [`OSCILLATION_CODE`] for cells
    /// where any input pair oscillated.
    pub fn export_code(&self, register: Register) -> u8 {
        if self.oscillated {
            OSCILLATION_CODE
        } else {
            self.gate(register).code()
        }
    }

    pub fn export_label(&self, register: Register) -> &'static str {
        if self.oscillated {
            "OSC"
        } else {
            self.gate(register).label()
        }
    }
}

/// Runs a program for all four input pairs and classifies both registers.
pub fn evaluate_gate<T: Scalar>(c: &LogicCircuit<T>, prog: &PhaseProgram<T>) -> Result<GateResult> {
    c.validate()?;
    prog.validate(c)?;
    Ok(evaluate_unchecked(c, prog))
}

fn evaluate_unchecked<T: Scalar>(c: &LogicCircuit<T>, prog: &PhaseProgram<T>) -> GateResult {
    let mut finals = [(false, false); 4];
    let mut m1 = BTreeMap::new();
    let mut m2 = BTreeMap::new();
    let mut oscillated = false;
    for pair in INPUT_PAIRS {
        let out = execute(c, prog, pair);
        finals[bit_index(pair)] = (out.s1, out.s2);
        m1.insert(pair, out.s1);
        m2.insert(pair, out.s2);
        oscillated |= out.oscillated;
    }
    let gate_m1 = Gate::ALL[usize::from(gate_code(&m1).expect("all pairs present"))];
    let gate_m2 = Gate::ALL[usize::from(gate_code(&m2).expect("all pairs present"))];
    GateResult { finals, gate_m1, gate_m2, oscillated }
}

/// Evenly spaced axis `min, min + step, …` up to `max` (inclusive within
/// half a step).
pub fn axis<T: Scalar>(min: T, max: T, step: T) -> Result<Vec<T>> {
    finite("axis min", min)?;
    finite("axis max", max)?;
    finite("axis step", step)?;
    if !(step > T::zero()) {
        return Err(Error::invalid("step", format!("must be positive, got {step}")));
    }
    if max < min {
        return Err(Error::invalid("max", "axis max is below axis min"));
    }
    let n = ((max - min) / step + T::lit(0.5)).floor().to_usize().unwrap_or(0) + 1;
    Ok((0..n).map(|k| min + T::from_usize(k).expect("index fits scalar") * step).collect())
}

/// Gate classification over a `(V1, V2)` grid at fixed V3.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMap<T> {
    pub v1_axis: Vec<T>,
    pub v2_axis: Vec<T>,
    pub v3: T,
    /// Row-major by `v1` index: `cells[i * v2_axis.len() + j]`.
    pub cells: Vec<GateResult>,
}

impl<T: Scalar> GateMap<T> {
    pub fn cell(&self, i: usize, j: usize) -> &GateResult {
        &self.cells[i * self.v2_axis.len() + j]
    }

    /// Gate of a register at a cell, `None` when the cell oscillated.
    pub fn gate(&self, i: usize, j: usize, register: Register) -> Option<Gate> {
        let cell = self.cell(i, j);
        (!cell.oscillated).then(|| cell.gate(register))
    }

    /// Number of non-oscillating cells realizing `gate` in `register`.
    pub fn count(&self, register: Register, gate: Gate) -> usize {
        self.cells.iter().filter(|c| !c.oscillated && c.gate(register) == gate).count()
    }

    pub fn oscillating_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.oscillated).count()
    }

    /// CSV `v1,v2,code_m1,label_m1,code_m2,label_m2,oscillated`, one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() * 64);
        out.push_str("v1,v2,code_m1,label_m1,code_m2,label_m2,oscillated\n");
        for (i, &v1) in self.v1_axis.iter().enumerate() {
            for (j, &v2) in self.v2_axis.iter().enumerate() {
                let cell = self.cell(i, j);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    sig9(v1),
                    sig9(v2),
                    cell.export_code(Register::M1),
                    cell.export_label(Register::M1),
                    cell.export_code(Register::M2),
                    cell.export_label(Register::M2),
                    u8::from(cell.oscillated),
                );
            }
        }
        out
    }

    /// ASCII heatmap of one register: V2 increases upward, V1 to the right.
    pub fn heatmap(&self, register: Register) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "register {:?}, V3 = {} V (rows: V2 high→low, columns: V1 low→high)", register, self.v3);
        let mut present = BTreeMap::new();
        for (j, &v2) in self.v2_axis.iter().enumerate().rev() {
            let _ = write!(out, "{:>7.2} ", v2.as_f64());
            for i in 0..self.v1_axis.len() {
                let glyph = match self.gate(i, j, register) {
                    Some(g) => {
                        present.insert(g.code(), g);
                        g.glyph()
                    }
                    None => '~',
                };
                out.push(glyph);
            }
            out.push('\n');
        }
        if let (Some(lo), Some(hi)) = (self.v1_axis.first(), self.v1_axis.last()) {
            let _ = writeln!(out, "        V1: {:.2} .. {:.2}", lo.as_f64(), hi.as_f64());
        }
        out.push_str("legend:");
        for g in present.values() {
            let _ = write!(out, " {}={}", g.glyph(), g.label());
        }
        if self.oscillating_cells() > 0 {
            out.push_str(" ~=oscillating");
        }
        out.push('\n');
        out
    }
}

/// Classifies every `(v1, v2)` cell with the canonical phase program.
///
/// Cells are evaluated in parallel on the current rayon pool; assembly order
/// is fixed, so the map does not depend on the pool size.
pub fn sweep_map<T: Scalar>(c: &LogicCircuit<T>, v3: T, v1_axis: &[T], v2_axis: &[T]) -> Result<GateMap<T>> {
    c.validate()?;
    if v1_axis.is_empty() || v2_axis.is_empty() {
        return Err(Error::invalid("axis", "sweep axes must be nonempty"));
    }
    for ax in [v1_axis, v2_axis] {
        if ax.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("axis", "sweep axes must be strictly increasing"));
        }
    }
    // Validate the program shape once; every cell shares it.
    PhaseProgram::canonical(c.v_hold_level, v1_axis[0], v2_axis[0], v3).validate(c)?;
    let n2 = v2_axis.len();
    let cells = (0..v1_axis.len() * n2)
        .into_par_iter()
        .map(|k| {
            let prog = PhaseProgram::canonical(c.v_hold_level, v1_axis[k / n2], v2_axis[k % n2], v3);
            evaluate_unchecked(c, &prog)
        })
        .collect();
    Ok(GateMap { v1_axis: v1_axis.to_vec(), v2_axis: v2_axis.to_vec(), v3, cells })
}
