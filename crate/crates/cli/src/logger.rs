use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use log::{Level, LevelFilter, Log, Metadata, Record};

pub const RUN_LOG: &str = "run.log";

/// Messages go to stderr; the same lines, with a timestamp, go to `run.log`
/// once an output directory is attached.
struct RunLogger {
    stderr_level: Level,
    file: Mutex<Option<File>>,
}

static LOGGER: std::sync::OnceLock<RunLogger> = std::sync::OnceLock::new();

impl Log for RunLogger {
    fn enabled(&self, metadata: &Metadata) -> bool {
        metadata.level() <= Level::Info || metadata.level() <= self.stderr_level
    }

    fn log(&self, record: &Record) {
        if !self.enabled(record.metadata()) {
            return;
        }
        if record.level() <= self.stderr_level {
            eprintln!("[{}] {}", record.level(), record.args());
        }
        if let Some(f) = self.file.lock().expect("log file lock").as_mut() {
            let now = chrono::Local::now().format("%Y-%m-%dT%H:%M:%S%.3f%:z");
            let _ = writeln!(f, "{now} {:<5} {}", record.level(), record.args());
        }
    }

    fn flush(&self) {
        if let Some(f) = self.file.lock().expect("log file lock").as_mut() {
            let _ = f.flush();
        }
    }
}

pub fn init(verbose: bool, quiet: bool) {
    let stderr_level = if quiet {
        Level::Error
    } else if verbose {
        Level::Debug
    } else {
        Level::Info
    };
    let logger = LOGGER.get_or_init(|| RunLogger { stderr_level, file: Mutex::new(None) });
    if log::set_logger(logger).is_ok() {
        log::set_max_level(if verbose { LevelFilter::Debug } else { LevelFilter::Info });
    }
}

/// Starts (truncating) `<dir>/run.log`.
pub fn attach(dir: &Path) -> std::io::Result<()> {
    let file = File::create(dir.join(RUN_LOG))?;
    if let Some(logger) = LOGGER.get() {
        *logger.file.lock().expect("log file lock") = Some(file);
    }
    Ok(())
}
