//! CSV sink for observation streams: `step,method,value,exact,elapsed_ns`.

use std::io::Write;

use super::Observation;
use crate::Result;

pub const OBSERVATION_HEADER: [&str; 5] = ["step", "method", "value", "exact", "elapsed_ns"];

pub struct ObservationSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> ObservationSink<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(inner);
        writer.write_record(OBSERVATION_HEADER)?;
        Ok(Self { writer })
    }

    /// Adaptive observations are written as `adaptive:<delegate>`.
    pub fn record(&mut self, obs: &Observation) -> Result<()> {
        let method = match obs.delegate {
            Some(d) => format!("{}:{}", obs.method, d),
            None => obs.method.to_string(),
        };
        let value = if obs.exact {
            format!("{}", obs.value as u64)
        } else {
            format!("{}", obs.value)
        };
        let elapsed = obs
            .cost_hint
            .map(|d| d.as_nanos().to_string())
            .unwrap_or_default();
        self.writer.write_record([
            obs.step.to_string(),
            method,
            value,
            obs.exact.to_string(),
            elapsed,
        ])?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.writer
            .into_inner()
            .map_err(|e| crate::Error::Io(e.into_error()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observers::ObservationMethod;
    use std::time::Duration;

    #[test]
    fn rows_are_formatted() {
        let mut sink = ObservationSink::new(Vec::new()).unwrap();
        sink.record(&Observation::exact(3, 42, ObservationMethod::BruteForce))
            .unwrap();
        let mut est = Observation::estimate(4, 2000.5, ObservationMethod::Adaptive);
        est.delegate = Some(ObservationMethod::Survey);
        est.cost_hint = Some(Duration::from_nanos(1500));
        sink.record(&est).unwrap();
        let text = String::from_utf8(sink.into_inner().unwrap()).unwrap();
        assert_eq!(
            text,
            "step,method,value,exact,elapsed_ns\n3,brute-force,42,true,\n4,adaptive:survey,2000.5,false,1500\n"
        );
    }
}
