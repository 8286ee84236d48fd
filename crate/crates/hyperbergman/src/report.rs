//! Result rows and the CSV writer.

use std::io::Write;

/// Comparison applied to a row's value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Check {
    None,
    AtMost(f64),
    AtLeast(f64),
}

impl Check {
    pub fn passes(self, value: f64) -> bool {
        match self {
            Check::None => true,
            Check::AtMost(b) => value <= b,
            Check::AtLeast(b) => value >= b,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub case: String,
    pub level: Option<u32>,
    pub h: Option<f64>,
    pub degree: Option<u32>,
    pub probe: Option<usize>,
    pub metric: String,
    pub value: f64,
    pub order: Option<f64>,
    pub check: Check,
}

impl Row {
    pub fn new(case: impl Into<String>, metric: impl Into<String>, value: f64) -> Self {
        Self {
            case: case.into(),
            level: None,
            h: None,
            degree: None,
            probe: None,
            metric: metric.into(),
            value,
            order: None,
            check: Check::None,
        }
    }

    pub fn level(mut self, l: u32) -> Self {
        self.level = Some(l);
        self
    }

    pub fn h(mut self, h: f64) -> Self {
        self.h = Some(h);
        self
    }

    pub fn degree(mut self, d: u32) -> Self {
        self.degree = Some(d);
        self
    }

    pub fn probe(mut self, p: usize) -> Self {
        self.probe = Some(p);
        self
    }

    pub fn order(mut self, o: f64) -> Self {
        self.order = Some(o);
        self
    }

    pub fn at_most(mut self, b: f64) -> Self {
        self.check = Check::AtMost(b);
        self
    }

    pub fn at_least(mut self, b: f64) -> Self {
        self.check = Check::AtLeast(b);
        self
    }

    pub fn passed(&self) -> bool {
        self.check.passes(self.value)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub rows: Vec<Row>,
}

pub const COLUMNS: [&str; 12] =
    ["experiment", "case", "level", "h", "degree", "probe", "metric", "value", "order", "check", "bound", "pass"];

/// Fixed 17-significant-digit float formatting.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Report {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self { experiment: experiment.into(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = Row>) {
        self.rows.extend(rows);
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(Row::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.passed())
    }

    /// Rows whose metric starts with `prefix`.
    pub fn metric<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.metric.starts_with(prefix))
    }

    /// Largest value among rows whose metric starts with `prefix`. NaN wins.
    pub fn worst(&self, prefix: &str) -> f64 {
        self.metric(prefix).map(|r| r.value).fold(0.0, |a: f64, v| if v.is_nan() || a.is_nan() { f64::NAN } else { a.max(v) })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        let opt_f = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        let opt_u = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let (check, bound) = match r.check {
                Check::None => ("", String::new()),
                Check::AtMost(b) => ("<=", fmt_float(b)),
                Check::AtLeast(b) => (">=", fmt_float(b)),
            };
            w.write_record([
                self.experiment.clone(),
                r.case.clone(),
                opt_u(r.level.map(u64::from)),
                opt_f(r.h),
                opt_u(r.degree.map(u64::from)),
                opt_u(r.probe.map(|p| p as u64)),
                r.metric.clone(),
                fmt_float(r.value),
                opt_f(r.order),
                check.to_string(),
                bound,
                r.passed().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `log2(coarse / fine)`: the observed order when the step halves.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
