//! Regenerates `fixtures/synthetic_20x20x3.tnsr`.
//!
//! cargo run -p sparselr-core --example gen_fixtures

use std::path::Path;

use sparselr::io::save_tensor;
use sparselr::synthetic::low_rank_dct_sparse;

fn main() -> sparselr::Result<()> {
    let out = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic_20x20x3.tnsr");
    let truth = low_rank_dct_sparse(&[20, 20, 3], 2, 3.0, 1)?;
    save_tensor(&truth, &out)?;
    println!("wrote {} ({:?})", out.display(), truth.shape());
    Ok(())
}
