//! Encode, corrupt and decode one RS(255, 223) codeword.

use lmimo_mbm::fec::RsCode;

fn main() -> lmimo_mbm::Result<()> {
    let code = RsCode::new(8, 255, 223)?;
    let message: Vec<u16> = (0..223).map(|i| (i * 7 % 256) as u16).collect();
    let mut word = code.encode(&message)?;
    for (k, pos) in [3usize, 40, 41, 100, 200, 230, 250].iter().enumerate() {
        word[*pos] ^= 1 + k as u16;
    }
    let out = code.decode(&word)?;
    println!("t = {}, status {:?}, message recovered: {}", code.t(), out.status, out.message == message);
    Ok(())
}
