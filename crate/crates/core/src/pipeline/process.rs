//! Runs one external process: feed stdin, collect stdout, enforce a timeout.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

#[derive(Debug)]
pub(crate) enum RunFailure {
    Spawn(std::io::Error),
    Timeout,
    Io(std::io::Error),
}

#[derive(Debug)]
pub(crate) struct RunOutput {
    pub status: ExitStatus,
    pub stdout: Vec<u8>,
    pub stderr: String,
    pub elapsed: Duration,
}

fn read_all(mut r: impl Read) -> std::io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    Ok(buf)
}

pub(crate) fn run(argv: &[String], cwd: Option<&Path>, input: String, timeout: Duration) -> Result<RunOutput, RunFailure> {
    let (program, args) = argv.split_first().ok_or_else(|| RunFailure::Spawn(std::io::Error::other("empty command")))?;
    let mut cmd = Command::new(program);
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    if let Some(dir) = cwd {
        cmd.current_dir(dir);
    }
    let started = Instant::now();
    let mut child = cmd.spawn().map_err(RunFailure::Spawn)?;
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let stdout = child.stdout.take().expect("stdout is piped");
    let stderr = child.stderr.take().expect("stderr is piped");

    // a process may exit without reading its input; a broken pipe is not our error
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let out_reader = thread::spawn(move || read_all(stdout));
    let err_reader = thread::spawn(move || read_all(stderr));

    let status = loop {
        match child.try_wait().map_err(RunFailure::Io)? {
            Some(status) => break status,
            None if started.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(RunFailure::Timeout);
            }
            None => thread::sleep(Duration::from_millis(1)),
        }
    };
    let elapsed = started.elapsed();
    let _ = writer.join();
    let stdout = out_reader.join().expect("reader thread").map_err(RunFailure::Io)?;
    let stderr = err_reader.join().expect("reader thread").map_err(RunFailure::Io)?;
    Ok(RunOutput {
        status,
        stdout,
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
        elapsed,
    })
}
