use super::{refine_root, FieldError, OdeError};

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// 5th minus 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output (Shampine) coefficients
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Any,
    Rising,
    Falling,
}

/// Zero-crossing condition `g(x, state) = 0`.
pub struct EventSpec<'a> {
    pub function: Box<dyn Fn(f64, &[f64]) -> f64 + 'a>,
    pub direction: Direction,
    pub terminal: bool,
}

impl<'a> EventSpec<'a> {
    pub fn new(function: impl Fn(f64, &[f64]) -> f64 + 'a) -> Self {
        EventSpec {
            function: Box::new(function),
            direction: Direction::Any,
            terminal: false,
        }
    }

    /// Zero crossings of one state component.
    pub fn component(index: usize) -> Self {
        Self::new(move |_, s| s[index])
    }

    pub fn direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn terminal(mut self, terminal: bool) -> Self {
        self.terminal = terminal;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub x: f64,
    pub state: Vec<f64>,
    /// Index into the event list passed to [`integrate`].
    pub spec: usize,
    pub rising: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Completed,
    EventStopped,
    /// The state exceeded the blow-up threshold; the solution ends at the
    /// last accepted point.
    BlowUp {
        last_good_x: f64,
    },
    /// The step size underflowed or the step budget ran out.
    StepFailure {
        last_good_x: f64,
        reason: String,
    },
}

#[derive(Debug, Clone)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
    pub blowup: f64,
    /// Events are refined until the bracket is below this times `max(1, |x|)`.
    pub event_rtol: f64,
    /// Upper bound on the step magnitude.
    pub h_max: Option<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rtol: 1e-9,
            atol: 1e-12,
            h0: None,
            max_steps: 200_000,
            blowup: 1e12,
            event_rtol: 1e-12,
            h_max: None,
        }
    }
}

impl Options {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Options {
            rtol,
            atol,
            ..Options::default()
        }
    }
}

#[derive(Debug, Clone)]
struct DenseStep {
    x: f64,
    h: f64,
    coeffs: [Vec<f64>; 5],
}

impl DenseStep {
    fn eval(&self, x: f64, out: &mut [f64]) {
        let theta = (x - self.x) / self.h;
        let theta1 = 1.0 - theta;
        let [c1, c2, c3, c4, c5] = &self.coeffs;
        for i in 0..out.len() {
            out[i] = c1[i] + theta * (c2[i] + theta1 * (c3[i] + theta * (c4[i] + theta1 * c5[i])));
        }
    }

    fn eval_derivative(&self, x: f64, out: &mut [f64]) {
        let t = (x - self.x) / self.h;
        let [_, c2, c3, c4, c5] = &self.coeffs;
        for i in 0..out.len() {
            let d = c2[i]
                + (1.0 - 2.0 * t) * c3[i]
                + t * (2.0 - 3.0 * t) * c4[i]
                + 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t) * c5[i];
            out[i] = d / self.h;
        }
    }
}

/// Accepted trajectory with a continuous interpolant between nodes.
///
/// Between consecutive nodes the interpolant is the cubic Hermite polynomial
/// through the node states and slopes plus the Dormand-Prince quartic
/// correction term.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    xs: Vec<f64>,
    states: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
    dense: Vec<DenseStep>,
    events: Vec<Event>,
    status: Status,
}

impl OdeSolution {
    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn derivatives(&self) -> &[Vec<f64>] {
        &self.derivs
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn x_start(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_end(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    /// Range covered, as `(min, max)`.
    pub fn range(&self) -> (f64, f64) {
        let (a, b) = (self.x_start(), self.x_end());
        (a.min(b), a.max(b))
    }

    fn locate(&self, x: f64) -> Result<Option<&DenseStep>, OdeError> {
        let (lo, hi) = self.range();
        let slack = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(OdeError::OutOfRange { x, lo, hi });
        }
        if self.dense.is_empty() {
            return Ok(None);
        }
        let forward = self.x_end() >= self.x_start();
        // first step whose right end is at or beyond x
        let idx = self.dense.partition_point(|st| {
            let right = st.x + st.h;
            if forward {
                right < x
            } else {
                right > x
            }
        });
        Ok(Some(&self.dense[idx.min(self.dense.len() - 1)]))
    }

    /// Interpolated state at `x`.
    pub fn eval(&self, x: f64) -> Result<Vec<f64>, OdeError> {
        let mut out = vec![0.0; self.dim()];
        match self.locate(x)? {
            Some(step) => step.eval(x, &mut out),
            None => out.copy_from_slice(&self.states[0]),
        }
        Ok(out)
    }

    pub fn eval_component(&self, x: f64, index: usize) -> Result<f64, OdeError> {
        Ok(self.eval(x)?[index])
    }

    /// Derivative of the interpolant at `x`.
    pub fn eval_derivative(&self, x: f64) -> Result<Vec<f64>, OdeError> {
        let mut out = vec![0.0; self.dim()];
        match self.locate(x)? {
            Some(step) => step.eval_derivative(x, &mut out),
            None => out.copy_from_slice(&self.derivs[0]),
        }
        Ok(out)
    }

    /// Zero crossings recorded for one event specification.
    pub fn events_for(&self, spec: usize) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.spec == spec)
    }
}

fn weighted_rms(v: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = v.len() as f64;
    let s: f64 = v
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

struct Stepper<'f, F> {
    field: &'f F,
    dim: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

enum StepOutcome {
    Ok,
    Domain,
}

impl<'f, F> Stepper<'f, F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), FieldError>,
{
    fn call(&self, x: f64, s: &[f64], out: &mut [f64]) -> Result<StepOutcome, OdeError> {
        match (self.field)(x, s, out) {
            Ok(()) if out.iter().all(|v| v.is_finite()) => Ok(StepOutcome::Ok),
            Ok(()) | Err(FieldError::Domain(_)) => Ok(StepOutcome::Domain),
            Err(FieldError::Fatal(message)) => Err(OdeError::Aborted { x, message }),
        }
    }

    /// One trial step from (x, y) with k[0] = f(x, y). Writes the 5th order
    /// solution to `y1` and the error vector to `err`; on success k[6] holds
    /// f(x + h, y1).
    fn step(
        &mut self,
        x: f64,
        y: &[f64],
        h: f64,
        y1: &mut [f64],
        err: &mut [f64],
    ) -> Result<StepOutcome, OdeError> {
        let n = self.dim;
        macro_rules! stage {
            ($out:expr, $c:expr, [$(($j:expr, $a:expr)),*]) => {{
                for i in 0..n {
                    self.tmp[i] = y[i] + h * (0.0 $(+ $a * self.k[$j][i])*);
                }
                let tmp = std::mem::take(&mut self.tmp);
                let mut kout = std::mem::take(&mut self.k[$out]);
                let r = self.call(x + $c * h, &tmp, &mut kout);
                self.tmp = tmp;
                self.k[$out] = kout;
                if let StepOutcome::Domain = r? {
                    return Ok(StepOutcome::Domain);
                }
            }};
        }
        stage!(1, C2, [(0, A21)]);
        stage!(2, C3, [(0, A31), (1, A32)]);
        stage!(3, C4, [(0, A41), (1, A42), (2, A43)]);
        stage!(4, C5, [(0, A51), (1, A52), (2, A53), (3, A54)]);
        stage!(5, 1.0, [(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        for i in 0..n {
            y1[i] = y[i]
                + h * (A71 * self.k[0][i]
                    + A73 * self.k[2][i]
                    + A74 * self.k[3][i]
                    + A75 * self.k[4][i]
                    + A76 * self.k[5][i]);
        }
        let mut k7 = std::mem::take(&mut self.k[6]);
        let r = self.call(x + h, y1, &mut k7);
        self.k[6] = k7;
        if let StepOutcome::Domain = r? {
            return Ok(StepOutcome::Domain);
        }
        for i in 0..n {
            err[i] = h
                * (E1 * self.k[0][i]
                    + E3 * self.k[2][i]
                    + E4 * self.k[3][i]
                    + E5 * self.k[4][i]
                    + E6 * self.k[5][i]
                    + E7 * self.k[6][i]);
        }
        Ok(StepOutcome::Ok)
    }

    fn dense(&self, x: f64, h: f64, y0: &[f64], y1: &[f64]) -> DenseStep {
        let n = self.dim;
        let mut c = [
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        ];
        let k = &self.k;
        for i in 0..n {
            let ydiff = y1[i] - y0[i];
            let bspl = h * k[0][i] - ydiff;
            c[0][i] = y0[i];
            c[1][i] = ydiff;
            c[2][i] = bspl;
            c[3][i] = ydiff - h * k[6][i] - bspl;
            c[4][i] = h
                * (D1 * k[0][i]
                    + D3 * k[2][i]
                    + D4 * k[3][i]
                    + D5 * k[4][i]
                    + D6 * k[5][i]
                    + D7 * k[6][i]);
        }
        DenseStep { x, h, coeffs: c }
    }
}

fn initial_step<F>(
    stepper: &Stepper<'_, F>,
    x0: f64,
    y0: &[f64],
    f0: &[f64],
    sign: f64,
    span: f64,
    opts: &Options,
) -> Result<f64, OdeError>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), FieldError>,
{
    let scale = |v: &[f64]| weighted_rms(v, y0, y0, opts.rtol, opts.atol);
    let d0 = scale(y0);
    let d1 = scale(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + sign * h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    if let StepOutcome::Domain = stepper.call(x0 + sign * h0, &y1, &mut f1)? {
        return Ok(h0 * 1e-3);
    }
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scale(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrates `s' = f(x, s)` from `x0` to `x1` (either direction).
///
/// The returned solution ends at `x1` unless a terminal event fired, the
/// state blew up, or the step size underflowed; `status` says which.
pub fn integrate<F>(
    field: F,
    x0: f64,
    s0: &[f64],
    x1: f64,
    opts: &Options,
    events: &[EventSpec<'_>],
) -> Result<OdeSolution, OdeError>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), FieldError>,
{
    if !(x0.is_finite() && x1.is_finite()) || x0 == x1 {
        return Err(OdeError::InvalidInput(format!(
            "need finite x0 != x1, got {x0} and {x1}"
        )));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(OdeError::InvalidInput("tolerances must be positive".into()));
    }
    if s0.is_empty() || s0.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::InvalidInput(
            "initial state must be non-empty and finite".into(),
        ));
    }
    let dim = s0.len();
    let sign = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut stepper = Stepper {
        field: &field,
        dim,
        k: std::array::from_fn(|_| vec![0.0; dim]),
        tmp: vec![0.0; dim],
    };

    let mut f0 = vec![0.0; dim];
    if let StepOutcome::Domain = stepper.call(x0, s0, &mut f0)? {
        return Err(OdeError::Aborted {
            x: x0,
            message: "vector field undefined at the initial point".into(),
        });
    }
    stepper.k[0].copy_from_slice(&f0);

    let mut sol = OdeSolution {
        xs: vec![x0],
        states: vec![s0.to_vec()],
        derivs: vec![f0.clone()],
        dense: Vec::new(),
        events: Vec::new(),
        status: Status::Completed,
    };

    let mut h = match opts.h0 {
        Some(h0) => h0.abs().min(span),
        None => initial_step(&stepper, x0, s0, &f0, sign, span, opts)?,
    };
    let h_max = opts.h_max.unwrap_or(span).min(span);
    h = h.min(h_max);

    let mut x = x0;
    let mut y = s0.to_vec();
    let mut y1 = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.function)(x0, s0)).collect();
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        if steps >= opts.max_steps {
            sol.status = Status::StepFailure {
                last_good_x: x,
                reason: "step budget exhausted".into(),
            };
            return Ok(sol);
        }
        let remaining = (x1 - x) * sign;
        if remaining <= 0.0 {
            break;
        }
        let h_min = 16.0 * f64::EPSILON * x.abs().max(1.0);
        if h < h_min {
            sol.status = Status::StepFailure {
                last_good_x: x,
                reason: format!("step size underflow (h = {h:e})"),
            };
            return Ok(sol);
        }
        let last = h >= remaining * (1.0 - 1e-12);
        let hs = if last { remaining } else { h };
        let signed = sign * hs;
        steps += 1;

        let outcome = stepper.step(x, &y, signed, &mut y1, &mut err)?;
        let err_norm = match outcome {
            StepOutcome::Ok => weighted_rms(&err, &y, &y1, opts.rtol, opts.atol),
            StepOutcome::Domain => f64::INFINITY,
        };
        if !err_norm.is_finite() || err_norm > 1.0 {
            let fac = if err_norm.is_finite() {
                (SAFETY * err_norm.powf(-0.2)).max(FAC_MIN)
            } else {
                0.25
            };
            h = hs * fac;
            last_rejected = true;
            continue;
        }

        if y1.iter().any(|v| v.abs() > opts.blowup) {
            sol.status = Status::BlowUp { last_good_x: x };
            return Ok(sol);
        }

        let x_new = if last { x1 } else { x + signed };
        let dense = stepper.dense(x, signed, &y, &y1);

        // Events within (x, x_new]
        let mut found: Vec<Event> = Vec::new();
        let mut g_new = Vec::with_capacity(events.len());
        for (i, spec) in events.iter().enumerate() {
            let gb = (spec.function)(x_new, &y1);
            g_new.push(gb);
            let ga = g_prev[i];
            if ga == 0.0 || !(ga.signum() != gb.signum() || gb == 0.0) {
                continue;
            }
            let rising = ga < 0.0;
            match spec.direction {
                Direction::Rising if !rising => continue,
                Direction::Falling if rising => continue,
                _ => {}
            }
            let xe = if gb == 0.0 {
                x_new
            } else {
                let mut buf = vec![0.0; dim];
                let tol = opts.event_rtol * x.abs().max(x_new.abs()).max(1.0);
                let g = |t: f64| {
                    dense.eval(t, &mut buf);
                    (spec.function)(t, &buf)
                };
                refine_root(g, x, x_new, tol).map_err(|e| OdeError::Aborted {
                    x,
                    message: e.to_string(),
                })?
            };
            let mut state = vec![0.0; dim];
            dense.eval(xe, &mut state);
            found.push(Event {
                x: xe,
                state,
                spec: i,
                rising,
            });
        }
        found.sort_by(|a, b| ((a.x - x) * sign).total_cmp(&((b.x - x) * sign)));
        let terminal = found.iter().position(|e| events[e.spec].terminal);

        if let Some(t) = terminal {
            let stop = found[t].clone();
            found.truncate(t + 1);
            sol.events.extend(found);
            // shorten the final step to the event location
            let mut state = stop.state.clone();
            dense.eval(stop.x, &mut state);
            let mut deriv = vec![0.0; dim];
            dense.eval_derivative(stop.x, &mut deriv);
            // the interpolant keeps the full step; only the last node moves
            sol.dense.push(dense);
            sol.xs.push(stop.x);
            sol.states.push(state);
            sol.derivs.push(deriv);
            sol.status = Status::EventStopped;
            return Ok(sol);
        }
        sol.events.extend(found);
        g_prev = g_new;

        sol.dense.push(dense);
        x = x_new;
        y.copy_from_slice(&y1);
        let k6 = stepper.k[6].clone();
        stepper.k[0].copy_from_slice(&k6);
        sol.xs.push(x);
        sol.states.push(y.clone());
        sol.derivs.push(k6);

        if last {
            break;
        }
        let mut fac = (SAFETY * err_norm.max(1e-10).powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = (hs * fac).min(h_max);
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(_x: f64, s: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        out[0] = s[1];
        out[1] = -s[0];
        Ok(())
    }

    #[test]
    fn harmonic_oscillator_half_period() {
        let sol = integrate(oscillator, 0.0, &[0.0, 1.0], PI, &Options::default(), &[]).unwrap();
        let s = sol.final_state();
        assert!(
            (s[0] - 0.0).abs() < 1e-8 && (s[1] + 1.0).abs() < 1e-8,
            "{s:?}"
        );
        assert_eq!(*sol.status(), Status::Completed);
    }

    #[test]
    fn sine_zero_event() {
        let ev = [EventSpec::component(0)];
        let sol = integrate(oscillator, 0.0, &[0.0, 1.0], 3.5, &Options::default(), &ev).unwrap();
        let zeros: Vec<f64> = sol.events().iter().map(|e| e.x).collect();
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0] - PI).abs() < 1e-9, "{zeros:?}");
        assert!(!sol.events()[0].rising);
    }

    #[test]
    fn terminal_event_stops_integration() {
        let ev = [EventSpec::component(0).terminal(true)];
        let sol = integrate(oscillator, 0.0, &[0.0, 1.0], 10.0, &Options::default(), &ev).unwrap();
        assert_eq!(*sol.status(), Status::EventStopped);
        assert!((sol.x_end() - PI).abs() < 1e-9);
        assert!(sol.final_state()[0].abs() < 1e-9);
    }

    #[test]
    fn direction_filter() {
        let ev = [EventSpec::component(0).direction(Direction::Rising)];
        let sol = integrate(oscillator, 0.0, &[0.0, 1.0], 7.0, &Options::default(), &ev).unwrap();
        let zeros: Vec<f64> = sol.events().iter().map(|e| e.x).collect();
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0] - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn backward_integration() {
        let sol = integrate(oscillator, PI, &[0.0, -1.0], 0.0, &Options::default(), &[]).unwrap();
        let s = sol.final_state();
        assert!(s[0].abs() < 1e-8 && (s[1] - 1.0).abs() < 1e-8);
        let mid = sol.eval(PI / 2.0).unwrap();
        assert!((mid[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dense_output_matches_nodes() {
        let sol = integrate(oscillator, 0.0, &[0.0, 1.0], 5.0, &Options::default(), &[]).unwrap();
        for (x, s) in sol.nodes().iter().zip(sol.states()) {
            let v = sol.eval(*x).unwrap();
            assert!((v[0] - s[0]).abs() < 1e-14 && (v[1] - s[1]).abs() < 1e-14);
        }
        for k in 0..100 {
            let x = 5.0 * k as f64 / 99.0;
            let v = sol.eval(x).unwrap();
            assert!((v[0] - x.sin()).abs() < 1e-8, "x={x}");
            let d = sol.eval_derivative(x).unwrap();
            assert!((d[0] - x.cos()).abs() < 1e-7, "x={x}");
        }
        assert!(sol.eval(5.1).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let f = |_x: f64, s: &[f64], out: &mut [f64]| {
            out[0] = s[0] * s[0];
            Ok(())
        };
        let sol = integrate(f, 0.0, &[1.0], 2.0, &Options::default(), &[]).unwrap();
        let last = match sol.status() {
            Status::BlowUp { last_good_x } | Status::StepFailure { last_good_x, .. } => {
                *last_good_x
            }
            s => panic!("unexpected status {s:?}"),
        };
        assert!((last - 1.0).abs() < 1e-3, "{last}");
    }

    #[test]
    fn fatal_field_error_aborts() {
        let f = |x: f64, s: &[f64], out: &mut [f64]| {
            if x > 0.5 {
                return Err(FieldError::Fatal("coefficient vanished".into()));
            }
            out[0] = s[0];
            Ok(())
        };
        let r = integrate(f, 0.0, &[1.0], 1.0, &Options::default(), &[]);
        assert!(matches!(r, Err(OdeError::Aborted { .. })));
    }

    #[test]
    fn invalid_requests() {
        assert!(integrate(oscillator, 1.0, &[0.0, 1.0], 1.0, &Options::default(), &[]).is_err());
        let bad = Options::with_tolerances(0.0, 1e-12);
        assert!(integrate(oscillator, 0.0, &[0.0, 1.0], 1.0, &bad, &[]).is_err());
    }
}
