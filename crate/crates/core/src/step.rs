use std::io::Write;

use crate::error::Result;
use crate::io::format_number;

/// Right-continuous piecewise-constant function on `[0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    initial_value: f64,
    jump_times: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// `jump_times` must be strictly increasing and as long as `values`.
    pub fn new(initial_value: f64, jump_times: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(jump_times.len(), values.len(), "one value per jump");
        debug_assert!(jump_times.windows(2).all(|w| w[0] < w[1]), "jump times must increase");
        Self { initial_value, jump_times, values }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(value, Vec::new(), Vec::new())
    }

    /// Value of the last jump at or before `u`.
    pub fn eval(&self, u: f64) -> f64 {
        match self.jump_times.partition_point(|&t| t <= u) {
            0 => self.initial_value,
            k => self.values[k - 1],
        }
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value after the last jump.
    pub fn terminal_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.initial_value)
    }

    /// `time,value` rows; the first row carries the initial value at time 0.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "time,value")?;
        if self.jump_times.first().is_none_or(|&t| t > 0.0) {
            writeln!(out, "0,{}", format_number(self.initial_value))?;
        }
        for (t, v) in self.jump_times.iter().zip(&self.values) {
            writeln!(out, "{},{}", format_number(*t), format_number(*v))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_is_right_continuous() {
        let f = StepFunction::new(1.0, vec![1.0, 2.0], vec![0.5, 0.25]);
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(0.999), 1.0);
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.eval(1.5), 0.5);
        assert_eq!(f.eval(2.0), 0.25);
        assert_eq!(f.eval(1e9), 0.25);
        assert_eq!(f.terminal_value(), 0.25);
        assert_eq!(StepFunction::constant(0.3).eval(5.0), 0.3);
    }

    #[test]
    fn csv_export() {
        let f = StepFunction::new(1.0, vec![1.0, 2.5], vec![2.0 / 3.0, 0.0]);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time,value\n0,1\n1,0.666666666667\n2.5,0\n");
    }
}
