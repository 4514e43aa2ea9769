//! Plain-text emitters: event traces and series as CSV with `#` preambles,
//! reports as `key: value` lines.

use std::fmt::Write as _;
use std::io::{self, Write};

use windtree_core::stats::AverageSeries;
use windtree_core::{EventRecord, EventSink};

/// Preamble lines shared by every emitted file.
#[derive(Debug, Clone, Default)]
pub struct Preamble {
    pub lines: Vec<(String, String)>,
}

impl Preamble {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    fn write_comments(&self, out: &mut String) {
        for (k, v) in &self.lines {
            let _ = writeln!(out, "# {k}: {v}");
        }
    }
}

/// Streams events as `t,x_paper,y_paper,dir_index,kind` rows.
pub struct TraceWriter<W: Write> {
    out: W,
    err: Option<io::Error>,
    pub rows: u64,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W, pre: &Preamble) -> io::Result<Self> {
        let mut head = String::new();
        pre.write_comments(&mut head);
        head.push_str("t,x_paper,y_paper,dir_index,kind\n");
        out.write_all(head.as_bytes())?;
        Ok(TraceWriter { out, err: None, rows: 0 })
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.err.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> EventSink for TraceWriter<W> {
    fn record(&mut self, _particle: usize, ev: &EventRecord) {
        if self.err.is_some() {
            return;
        }
        let p = ev.pos.to_paper();
        let r = writeln!(self.out, "{},{},{},{},{}", ev.t, p.x, p.y, ev.dir_after.number(), ev.kind.name());
        match r {
            Ok(()) => self.rows += 1,
            Err(e) => self.err = Some(e),
        }
    }
}

/// `t,value,f1,f2,f3,f4`; undefined values are left empty.
pub fn render_series(series: &AverageSeries, pre: &Preamble, value_name: &str, column_prefix: &str) -> String {
    let mut out = String::new();
    pre.write_comments(&mut out);
    let m = &series.meta;
    let _ = writeln!(out, "# T: {}", m.t_total);
    let _ = writeln!(out, "# K: {}", m.k);
    if let Some(seed) = m.seed {
        let _ = writeln!(out, "# seed: {seed}");
    }
    let _ = writeln!(out, "# config_digest: {:016x}", m.config_digest);
    let _ = writeln!(
        out,
        "t,{value_name},{p}1,{p}2,{p}3,{p}4",
        p = column_prefix
    );
    for ((t, v), row) in series.times.iter().zip(&series.values).zip(&series.per_direction) {
        let v = v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{t},{v},{},{},{},{}", row[0], row[1], row[2], row[3]);
    }
    out
}

/// `key: value` lines.
#[derive(Debug, Clone, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn from_preamble(pre: &Preamble) -> Self {
        Report { lines: pre.lines.clone() }
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k}: {v}");
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn join4(v: &[f64; 4]) -> String {
    format!("{} {} {} {}", v[0], v[1], v[2], v[3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use windtree_core::stats::SeriesMeta;
    use windtree_core::{DirIndex, EventKind, InternalPoint};

    #[test]
    fn trace_rows() {
        let pre = Preamble::default().with("command", "x");
        let mut w = TraceWriter::new(Vec::new(), &pre).unwrap();
        w.record(
            0,
            &EventRecord {
                t: 1.5,
                kind: EventKind::Reflection,
                pos: InternalPoint::new(0.0, 0.0),
                dir_before: DirIndex::I1,
                dir_after: DirIndex::I2,
            },
        );
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(text, "# command: x\nt,x_paper,y_paper,dir_index,kind\n1.5,0,0,2,reflection\n");
    }

    #[test]
    fn series_rows() {
        let s = AverageSeries {
            times: vec![1.0, 2.0],
            values: vec![None, Some(0.5)],
            per_direction: vec![[0.0; 4], [1.0, 2.0, 3.0, 4.0]],
            meta: SeriesMeta {
                t_total: 2.0,
                k: 1,
                seed: Some(3),
                config_digest: 255,
            },
        };
        let text = render_series(&s, &Preamble::default(), "ratio", "I");
        assert!(text.ends_with("t,ratio,I1,I2,I3,I4\n1,,0,0,0,0\n2,0.5,1,2,3,4\n"));
        assert!(text.contains("# config_digest: 00000000000000ff\n"));
    }
}
