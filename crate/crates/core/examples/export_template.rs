//! Writes the built-in blood bar template and its matching mask as a PNG
//! pair, the on-disk form consumed by `--template-dir` and
//! `BloodBarTemplate::from_png_pair`.
//!
//! The committed `assets/template.png` and `assets/template_mask.png`
//! were produced by this program:
//!
//! ```text
//! cargo run -p heroscan-core --example export_template -- assets
//! ```

use heroscan_core::BloodBarTemplate;

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "assets".into());
    let dir = std::path::PathBuf::from(dir);
    std::fs::create_dir_all(&dir).expect("create output directory");
    let template = BloodBarTemplate::builtin();
    let image = dir.join("template.png");
    let mask = dir.join("template_mask.png");
    template
        .save_png_pair(&image, &mask)
        .expect("write template pair");
    println!("wrote {} and {}", image.display(), mask.display());
}
