//! Line-oriented teaching session over a category memory.

use std::io::{BufRead, Write};
use std::path::Path;

use orthoview::{global_feature, read_cloud, CategoryMemory, Classification, FeatureConfig, GlobalFeature, Metric};

pub struct Session {
    pub memory: CategoryMemory,
    pub features: FeatureConfig,
    pub metric: Metric,
    pub tau_unknown: f64,
}

pub enum Reply {
    Line(String),
    Quit,
}

impl Session {
    fn feature(&self, file: &str) -> Result<GlobalFeature, String> {
        let cloud = read_cloud(Path::new(file)).map_err(|e| e.to_string())?;
        global_feature(&cloud, &self.features).map_err(|e| e.to_string())
    }

    pub fn execute(&mut self, line: &str) -> Reply {
        let words: Vec<&str> = line.split_whitespace().collect();
        let result = match words.as_slice() {
            [] => return Reply::Line(String::new()),
            ["quit"] | ["exit"] => return Reply::Quit,
            ["teach", label, file] => self.feature(file).and_then(|f| {
                self.memory.teach(label, f).map_err(|e| e.to_string())?;
                let n = self.memory.instances(label).map_or(0, <[_]>::len);
                Ok(format!("taught {label} ({n} instances)"))
            }),
            ["ask", file] => self.feature(file).and_then(|f| {
                match self
                    .memory
                    .classify(&f, self.metric, self.tau_unknown)
                    .map_err(|e| e.to_string())?
                {
                    Classification::Known(p) => Ok(format!("{} (distance {:.4})", p.label, p.distance)),
                    Classification::Unknown => Ok("unknown".to_owned()),
                }
            }),
            ["forget", label] => match self.memory.forget(label) {
                Ok(()) => Ok(format!("forgot {label}")),
                Err(orthoview::Error::UnknownLabel(_)) => Err("unknown label".to_owned()),
                Err(e) => Err(e.to_string()),
            },
            ["stats"] => {
                let s = self.memory.stats();
                let counts: Vec<String> = s.counts.iter().map(|(l, n)| format!("{l}={n}")).collect();
                Ok(format!(
                    "{} categories, {} instances, {:.2} per category{}{}",
                    s.categories,
                    s.total_instances,
                    s.average_instances,
                    if counts.is_empty() { "" } else { ": " },
                    counts.join(" ")
                ))
            }
            ["save", file] => self
                .memory
                .save(Path::new(file))
                .map(|()| format!("saved {file}"))
                .map_err(|e| e.to_string()),
            _ => Err(format!("unrecognized command `{line}`")),
        };
        Reply::Line(match result {
            Ok(s) => s,
            Err(e) => format!("error: {e}"),
        })
    }

    pub fn run<R: BufRead, W: Write>(&mut self, input: R, mut output: W) -> std::io::Result<()> {
        for line in input.lines() {
            match self.execute(line?.trim()) {
                Reply::Quit => break,
                Reply::Line(s) if s.is_empty() => {}
                Reply::Line(s) => {
                    writeln!(output, "{s}")?;
                    output.flush()?;
                }
            }
        }
        Ok(())
    }
}
