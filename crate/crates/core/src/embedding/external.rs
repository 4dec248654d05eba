//! Child-process embedding providers.
//!
//! Wire protocol, one JSON object per line on the child's stdin/stdout:
//!
//! ```text
//! provider → {"name": "unixcoder", "version": "1", "dimension": 768}   (handshake)
//! client   → {"id": 0, "text": "save note button"}
//! provider → {"id": 0, "vector": [0.12, -0.5, ...]}
//! provider → {"id": 1, "error": "input too long"}
//! ```
//!
//! Responses may arrive in any order; ids are request positions. The client
//! closes stdin after the last request.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    CorpusEmbedding, EmbedError, EmbeddingProvider, EmbeddingVector, LexicalModel,
    ProviderIdentity, ProviderKey,
};
use crate::preprocess::{Segment, TokenStream};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalConfig {
    pub program: String,
    pub args: Vec<String>,
    /// Maximum wait for any single line from the provider.
    pub timeout: Duration,
}

impl ExternalConfig {
    pub fn new(program: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            program: program.into(),
            args: args.into_iter().map(Into::into).collect(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    /// Splits a shell-style command line (`python3 embed.py --model x`).
    pub fn from_command_line(command: &str) -> Option<Self> {
        let mut words = shlex::split(command)?.into_iter();
        let program = words.next()?;
        Some(Self::new(program, words))
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn display(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Handshake {
    name: String,
    version: String,
    dimension: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Request<'a> {
    id: usize,
    text: &'a str,
}

#[derive(Debug, Deserialize)]
struct Response {
    id: usize,
    #[serde(default)]
    vector: Option<Vec<f64>>,
    #[serde(default)]
    error: Option<String>,
}

/// Vectors from one provider run, in request order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalBatch {
    pub identity: ProviderIdentity,
    pub vectors: Vec<EmbeddingVector>,
}

/// Embeds `texts` with a freshly spawned provider. No process is started for
/// an empty batch.
pub fn embed_external(texts: &[String], config: &ExternalConfig) -> Result<Vec<EmbeddingVector>, EmbedError> {
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    Ok(run_batch(texts, config)?.vectors)
}

/// Starts the provider only to read its handshake.
pub fn probe_identity(config: &ExternalConfig) -> Result<ProviderIdentity, EmbedError> {
    Ok(run_batch(&[], config)?.identity)
}

struct Session {
    child: Child,
    lines: Receiver<std::io::Result<String>>,
    line_no: usize,
    timeout: Duration,
}

impl Session {
    fn spawn(config: &ExternalConfig) -> Result<(Self, ChildStdin), EmbedError> {
        let mut child = Command::new(&config.program)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| EmbedError::Launch {
                command: config.display(),
                source,
            })?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok((
            Session {
                child,
                lines: rx,
                line_no: 0,
                timeout: config.timeout,
            },
            stdin,
        ))
    }

    /// Next non-blank line; `None` on end of stream.
    fn next_line(&mut self, waiting_for: impl FnOnce() -> String) -> Result<Option<String>, EmbedError> {
        loop {
            match self.lines.recv_timeout(self.timeout) {
                Ok(Ok(line)) => {
                    self.line_no += 1;
                    if !line.trim().is_empty() {
                        return Ok(Some(line));
                    }
                }
                Ok(Err(err)) => return Err(EmbedError::Io(err)),
                Err(RecvTimeoutError::Disconnected) => return Ok(None),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(EmbedError::Timeout {
                        timeout_ms: self.timeout.as_millis(),
                        waiting_for: waiting_for(),
                    })
                }
            }
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn run_batch(texts: &[String], config: &ExternalConfig) -> Result<ExternalBatch, EmbedError> {
    let (mut session, stdin) = Session::spawn(config)?;

    let handshake_line = session
        .next_line(|| "handshake".to_string())?
        .ok_or_else(|| EmbedError::Handshake("provider closed its output before the handshake".into()))?;
    let handshake: Handshake = serde_json::from_str(&handshake_line)
        .map_err(|e| EmbedError::Handshake(format!("{e}: {handshake_line}")))?;
    if handshake.dimension == 0 {
        return Err(EmbedError::Handshake("dimension must be positive".into()));
    }
    let identity = ProviderIdentity {
        name: handshake.name,
        version: handshake.version,
        dimension: handshake.dimension,
    };

    let requests: Vec<String> = texts
        .iter()
        .enumerate()
        .map(|(id, text)| serde_json::to_string(&Request { id, text }).expect("requests serialize"))
        .collect();
    // A separate writer keeps a provider that answers while reading from
    // filling its stdout pipe and stalling us both.
    let writer = thread::spawn(move || {
        let mut stdin = std::io::BufWriter::new(stdin);
        for line in requests {
            if writeln!(stdin, "{line}").is_err() {
                return;
            }
        }
        let _ = stdin.flush();
    });

    let mut slots: Vec<Option<EmbeddingVector>> = vec![None; texts.len()];
    let mut received = 0;
    while received < texts.len() {
        let pending = texts.len() - received;
        let Some(line) = session.next_line(|| format!("{pending} outstanding responses"))? else {
            return Err(EmbedError::ProcessExited {
                received,
                expected: texts.len(),
            });
        };
        let line_no = session.line_no;
        let response: Response = serde_json::from_str(&line).map_err(|e| EmbedError::Malformed {
            line: line_no,
            reason: e.to_string(),
        })?;
        let index = response.id;
        if index >= texts.len() {
            return Err(EmbedError::Malformed {
                line: line_no,
                reason: format!("unknown request id {index}"),
            });
        }
        if slots[index].is_some() {
            return Err(EmbedError::Malformed {
                line: line_no,
                reason: format!("duplicate response for id {index}"),
            });
        }
        let values = match (response.vector, response.error) {
            (_, Some(message)) => return Err(EmbedError::ItemFailed { index, message }),
            (Some(values), None) => values,
            (None, None) => {
                return Err(EmbedError::Malformed {
                    line: line_no,
                    reason: "response has neither `vector` nor `error`".into(),
                })
            }
        };
        if values.len() != identity.dimension {
            return Err(EmbedError::DimensionDrift {
                index,
                expected: identity.dimension,
                actual: values.len(),
            });
        }
        slots[index] = Some(EmbeddingVector::new(values)?);
        received += 1;
    }
    let _ = writer.join();

    Ok(ExternalBatch {
        identity,
        vectors: slots.into_iter().map(|v| v.expect("all slots filled")).collect(),
    })
}

/// Provider backed by an external process. Each embedding call spawns the
/// process once and streams the whole batch through it.
#[derive(Debug, Clone)]
pub struct ExternalProvider {
    config: ExternalConfig,
    identity: Option<ProviderIdentity>,
}

impl ExternalProvider {
    pub fn new(config: ExternalConfig) -> Self {
        Self {
            config,
            identity: None,
        }
    }

    pub fn config(&self) -> &ExternalConfig {
        &self.config
    }

    fn run(&mut self, texts: &[String]) -> Result<ExternalBatch, EmbedError> {
        let batch = run_batch(texts, &self.config)?;
        match &self.identity {
            Some(known) if *known != batch.identity => {
                return Err(EmbedError::IdentityChanged {
                    indexed: format!("{}/{}", known.key(), known.dimension),
                    current: format!("{}/{}", batch.identity.key(), batch.identity.dimension),
                })
            }
            Some(_) => {}
            None => self.identity = Some(batch.identity.clone()),
        }
        Ok(batch)
    }
}

fn join_tokens(tokens: &[String]) -> String {
    tokens.join(" ")
}

impl EmbeddingProvider for ExternalProvider {
    fn key(&mut self) -> Result<ProviderKey, EmbedError> {
        if self.identity.is_none() {
            self.identity = Some(probe_identity(&self.config)?);
        }
        Ok(self.identity.as_ref().expect("set above").key())
    }

    fn embed_corpus(&mut self, segments: &[Segment]) -> Result<CorpusEmbedding, EmbedError> {
        if segments.is_empty() {
            return Err(EmbedError::EmptyCorpus("no segments"));
        }
        let texts: Vec<String> = segments.iter().map(|s| join_tokens(&s.tokens)).collect();
        let batch = self.run(&texts)?;
        Ok(CorpusEmbedding {
            identity: batch.identity,
            vectors: batch.vectors,
            lexical_model: None,
        })
    }

    fn embed_query(
        &mut self,
        query: &TokenStream,
        _lexical_model: Option<&LexicalModel>,
    ) -> Result<EmbeddingVector, EmbedError> {
        let mut batch = self.run(&[join_tokens(&query.tokens)])?;
        Ok(batch.vectors.pop().expect("one request, one vector"))
    }
}
