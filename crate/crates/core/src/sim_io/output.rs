//! CSV series and PGM space-time images.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a grade
//! of one appears as `1.0`. Row order is fixed, which keeps files
//! byte-identical across runs with the same inputs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::fcm::FcmState;
use crate::metrics::{FundamentalDiagram, QueueSeries};
use crate::nasch::NaschState;

/// Grey levels on a time x cell grid; each entry is a membership grade.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpacetimeImage {
    pub width: usize,
    pub rows: Vec<Vec<f64>>,
}

impl SpacetimeImage {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
        }
    }

    pub fn push_fcm(&mut self, state: &FcmState) {
        self.rows.push(state.cell_grades());
    }

    pub fn push_nasch(&mut self, state: &NaschState) {
        let mut row = vec![0.0; self.width];
        for c in state.cells().into_iter().flatten() {
            row[c] = 1.0;
        }
        self.rows.push(row);
    }

    pub fn from_fcm(states: &[FcmState]) -> Self {
        let width = states.first().map_or(0, |s| s.road().length as usize);
        let mut img = Self::new(width);
        states.iter().for_each(|s| img.push_fcm(s));
        img
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }
}

pub fn pixel(grade: f64) -> u8 {
    (255.0 * (1.0 - grade.clamp(0.0, 1.0))).round() as u8
}

/// Binary PGM (P5), 8-bit, white for empty cells.
pub fn write_pgm(image: &SpacetimeImage, path: &Path) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", image.width, image.height())?;
    for row in &image.rows {
        let bytes: Vec<u8> = (0..image.width)
            .map(|c| pixel(row.get(c).copied().unwrap_or(0.0)))
            .collect();
        out.write_all(&bytes)?;
    }
    out.flush()
}

pub fn write_spacetime(states: &[FcmState], path: &Path) -> io::Result<()> {
    write_pgm(&SpacetimeImage::from_fcm(states), path)
}

fn csv_writer(path: &Path) -> io::Result<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(File::create(path)?))
}

fn flush(mut w: csv::Writer<File>) -> io::Result<()> {
    w.flush()
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

/// `step,length,grade` for a fuzzy series, `step,length,probability` for an
/// empirical one. Zero entries are omitted.
pub fn write_queue_csv(series: &QueueSeries, path: &Path) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    match series {
        QueueSeries::Fuzzy(steps) => {
            w.write_record(["step", "length", "grade"])?;
            for (t, q) in steps.iter().enumerate() {
                for (x, g) in q.entries() {
                    w.write_record([t.to_string(), x.to_string(), f(g)])?;
                }
            }
        }
        QueueSeries::Empirical(steps) => {
            w.write_record(["step", "length", "probability"])?;
            for (t, h) in steps.iter().enumerate() {
                for (x, p) in h.probabilities() {
                    w.write_record([t.to_string(), x.to_string(), f(p)])?;
                }
            }
        }
    }
    flush(w)
}

/// Fuzzy points as `density,flow_argmax,cut_low,cut_high`; NaSch points as
/// `density,flow,probability`, one row per dot above the probability threshold.
pub fn write_fd_csv(diagram: &FundamentalDiagram, path: &Path) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    match diagram {
        FundamentalDiagram::Fuzzy(points) => {
            w.write_record(["density", "flow_argmax", "cut_low", "cut_high"])?;
            for p in points {
                w.write_record([
                    f(p.density),
                    f(p.flow.argmax),
                    f(p.flow.cut_low),
                    f(p.flow.cut_high),
                ])?;
            }
        }
        FundamentalDiagram::Nasch(points) => {
            w.write_record(["density", "flow", "probability"])?;
            for p in points {
                for (flow, prob) in p.dots() {
                    w.write_record([f(p.density), f(flow), f(prob)])?;
                }
            }
        }
    }
    flush(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::FuzzySet;
    use crate::metrics::Histogram;

    fn read(path: &Path) -> String {
        std::fs::read_to_string(path).unwrap()
    }

    #[test]
    fn queue_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        let series = QueueSeries::Fuzzy(vec![
            FuzzySet::new([(50, 1.0)]).unwrap(),
            FuzzySet::new([(0, 0.8), (1, 0.2)]).unwrap(),
        ]);
        write_queue_csv(&series, &path).unwrap();
        assert_eq!(
            read(&path),
            "step,length,grade\n0,50,1.0\n1,0,0.8\n1,1,0.2\n"
        );

        let series = QueueSeries::Empirical(vec![Histogram::from_samples([50; 200])]);
        write_queue_csv(&series, &path).unwrap();
        assert_eq!(read(&path), "step,length,probability\n0,50,1.0\n");
    }

    #[test]
    fn empty_series_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        write_queue_csv(&QueueSeries::Fuzzy(vec![]), &path).unwrap();
        assert_eq!(read(&path), "step,length,grade\n");
        write_fd_csv(&FundamentalDiagram::Nasch(vec![]), &path).unwrap();
        assert_eq!(read(&path), "density,flow,probability\n");
    }

    #[test]
    fn pgm_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.pgm");
        let img = SpacetimeImage {
            width: 3,
            rows: vec![vec![1.0, 0.0, 0.2], vec![0.0; 3]],
        };
        write_pgm(&img, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0, 255, 204, 255, 255, 255]);
    }
}
