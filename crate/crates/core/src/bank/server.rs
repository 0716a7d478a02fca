//! Thread-per-connection TCP front end for [`Bank`] and a blocking client.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use super::{Bank, WireResponse};
use crate::scheme::{format_value_hex, SeriesId, TokenReport};

/// Accepts connections until `stop` is set, answering one line per request.
pub fn serve(bank: Arc<Bank>, listener: TcpListener, stop: Arc<AtomicBool>) -> io::Result<()> {
    for stream in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let stream = match stream {
            Ok(s) => s,
            Err(_) => continue,
        };
        let bank = Arc::clone(&bank);
        thread::spawn(move || {
            let _ = handle_connection(&bank, stream);
        });
    }
    Ok(())
}

fn handle_connection(bank: &Bank, stream: TcpStream) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = bank.handle_line(&line);
        writeln!(writer, "{response}")?;
        writer.flush()?;
    }
    Ok(())
}

/// A server running on a background thread.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl ServerHandle {
    /// Binds `addr` (port 0 picks a free port) and starts serving `bank`.
    pub fn spawn(bank: Arc<Bank>, addr: impl ToSocketAddrs) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let thread = thread::spawn(move || serve(bank, listener, flag));
        Ok(Self {
            addr,
            stop,
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections and joins the accept loop. Open
    /// connections finish on their own threads.
    pub fn shutdown(mut self) -> io::Result<()> {
        self.stop_inner()
    }

    fn stop_inner(&mut self) -> io::Result<()> {
        let Some(thread) = self.thread.take() else {
            return Ok(());
        };
        self.stop.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.addr);
        thread
            .join()
            .map_err(|_| io::Error::other("server thread panicked"))?
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop_inner();
    }
}

/// Blocking line-protocol client.
pub struct BankClient {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl BankClient {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
        })
    }

    /// Sends one raw line and returns the raw response line.
    pub fn request_line(&mut self, line: &str) -> io::Result<String> {
        writeln!(self.writer, "{line}")?;
        self.writer.flush()?;
        let mut response = String::new();
        if self.reader.read_line(&mut response)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "server closed the connection"));
        }
        Ok(response.trim_end().to_owned())
    }

    pub fn request(&mut self, line: &str) -> io::Result<WireResponse> {
        let raw = self.request_line(line)?;
        WireResponse::parse(&raw).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn verify(&mut self, series: &SeriesId, k: u32, report: &TokenReport) -> io::Result<WireResponse> {
        self.request(&format!("VERIFY {series} {} {}", report.index(), report.value_hex(k)))
    }

    pub fn decode(&mut self, series: &SeriesId, k: u32, index: u64, ciphertext: u64) -> io::Result<WireResponse> {
        self.request(&format!("DECODE {series} {index} {}", format_value_hex(ciphertext, k)))
    }

    pub fn vote(&mut self, series: &SeriesId, k: u32, index: u64, ciphertext: u64) -> io::Result<WireResponse> {
        self.request(&format!("VOTE {series} {index} {}", format_value_hex(ciphertext, k)))
    }

    pub fn tally(&mut self, series: &SeriesId) -> io::Result<WireResponse> {
        self.request(&format!("TALLY {series}"))
    }
}
