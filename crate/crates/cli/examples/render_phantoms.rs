//! Regenerates the shipped phantom images under `data/`.

use std::path::Path;

use mlcs::pgm::save_pgm;
use mlcs::phantom::Scene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for side in [128, 256, 512] {
        save_pgm(&Scene::Ellipses.render(side), &dir.join(format!("phantom_{side}.pgm")), 65535)?;
        save_pgm(&Scene::PiecewiseSmooth.render(side), &dir.join(format!("scene_{side}.pgm")), 65535)?;
    }
    Ok(())
}
