use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator behind every simulation stream.
pub type SimRng = ChaCha8Rng;

/// Stream for chunk `chunk_index` under seed `master`.
///
/// ChaCha's 64-bit stream id selects one of 2^64 non-overlapping keystreams
/// for the same key, so chunks never share draws and the stream depends only
/// on `(master, chunk_index)`, never on which worker runs the chunk.
pub fn seed_stream(master: u64, chunk_index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(chunk_index);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `cell`-th copula cell of a sweep, so that cells draw from
/// unrelated keys.
pub(crate) fn cell_seed(master: u64, cell: u64) -> u64 {
    splitmix64(master ^ splitmix64(cell))
}
