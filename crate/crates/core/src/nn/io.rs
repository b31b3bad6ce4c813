//! Binary network format: magic `FPLNET1\0`, little-endian `u32` header
//! length, a JSON header, then every parameter as little-endian `f64`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::network::{Activation, Network, OutputHead};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"FPLNET1\0";

#[derive(Serialize, Deserialize)]
struct Header {
    widths: Vec<usize>,
    activations: Vec<Activation>,
    head: OutputHead,
    num_params: usize,
}

pub fn write_network<T: Scalar, W: Write>(net: &Network<T>, mut w: W) -> Result<()> {
    let header = serde_json::to_vec(&Header {
        widths: net.widths().to_vec(),
        activations: net.activations().to_vec(),
        head: net.head(),
        num_params: net.num_params(),
    })?;
    w.write_all(MAGIC)?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(8 * net.num_params());
    for p in net.params() {
        buf.extend_from_slice(&p.as_f64().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_network<T: Scalar, R: Read>(mut r: R) -> Result<Network<T>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::format("network", "truncated magic"))?;
    if &magic != MAGIC {
        return Err(Error::format("network", "bad magic"));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)
        .map_err(|_| Error::format("network", "truncated header length"))?;
    let len = u32::from_le_bytes(len) as usize;
    let mut header = vec![0u8; len];
    r.read_exact(&mut header)
        .map_err(|_| Error::format("network", "truncated header"))?;
    let header: Header =
        serde_json::from_slice(&header).map_err(|e| Error::format("network", e.to_string()))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != 8 * header.num_params {
        return Err(Error::format(
            "network",
            format!("expected {} parameter bytes, found {}", 8 * header.num_params, payload.len()),
        ));
    }
    let params = payload
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
        .collect();
    Network::from_params(&header.widths, header.activations, header.head, params)
}

pub fn save_network<T: Scalar>(net: &Network<T>, path: &std::path::Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_network(net, std::io::BufWriter::new(f))
}

pub fn load_network<T: Scalar>(path: &std::path::Path) -> Result<Network<T>> {
    let f = std::fs::File::open(path)?;
    read_network(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let net = Network::<f64>::init(&[3, 7, 2], Activation::Relu, OutputHead::Softmax, 0.3, 12).unwrap();
        let mut bytes = Vec::new();
        write_network(&net, &mut bytes).unwrap();
        let back: Network<f64> = read_network(bytes.as_slice()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let net = Network::<f64>::init(&[1, 2, 1], Activation::Tanh, OutputHead::Linear, 0.3, 1).unwrap();
        let mut bytes = Vec::new();
        write_network(&net, &mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_network::<f64, _>(bad.as_slice()), Err(Error::Format { .. })));
        let short = &bytes[..bytes.len() - 3];
        assert!(matches!(read_network::<f64, _>(short), Err(Error::Format { .. })));
    }
}
