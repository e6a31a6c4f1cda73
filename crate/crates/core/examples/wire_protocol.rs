//! Alice and Bob as two endpoints of a TCP connection exchanging
//! newline-delimited JSON frames. Both derive the same trace.

use std::net::{TcpListener, TcpStream};
use std::thread;

use qet::locc::{run_alice, run_bob, Policy};
use qet::ModelParams;

/// `(alice digest, bob digest)`.
pub fn run_example() -> qet::Result<(String, String)> {
    let p = ModelParams::new(3.0, 4.0)?;
    let t_c = 0.5;
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;

    let alice = thread::spawn(move || -> qet::Result<String> {
        let (stream, _) = listener.accept()?;
        Ok(run_alice(stream, &p, t_c, Policy::Optimize)?.digest())
    });
    let bob = run_bob(TcpStream::connect(addr)?, &p, t_c, Policy::Optimize)?.digest();
    let alice = alice.join().expect("alice thread")?;

    println!("alice {alice}");
    println!("bob   {bob}");
    Ok((alice, bob))
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
