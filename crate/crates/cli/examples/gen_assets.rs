//! Regenerates the bundled demo map. Run from the repository root:
//!
//! ```text
//! cargo run -p fireroute-cli --example gen_assets
//! ```

use fireroute_core::synth::two_corridor_map;

fn main() {
    let map = two_corridor_map();
    std::fs::create_dir_all("assets").expect("create assets dir");
    map.save_png("assets/two_corridor.png", None, None)
        .expect("write demo map");
    println!(
        "wrote assets/two_corridor.png ({}x{})",
        map.width(),
        map.height()
    );
}
