//! Save a model to a JSON checkpoint, load it back and compare predictions.

use mstgn::model::{load_checkpoint, save_checkpoint, ModelConfig, TgnModel};
use mstgn::numerics::Tensor;

fn main() -> mstgn::Result<()> {
    let model = TgnModel::from_config(ModelConfig::desk("ntu25", 4), 11)?;
    let path = std::env::temp_dir().join("mstgn_example_checkpoint.json");
    save_checkpoint(&model, &path)?;
    let restored = load_checkpoint(&path)?;
    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);

    let n = 2 * 3 * 16 * 25 * 2;
    let batch = Tensor::new(vec![2, 3, 16, 25, 2], (0..n).map(|i| (i as f64 * 0.013).cos()).collect())?;
    let a = model.predict(&batch)?;
    let b = restored.predict(&batch)?;
    println!("checkpoint {} ({bytes} bytes), {} tensors", path.display(), restored.params.len());
    println!("identical predictions: {}", a.data() == b.data());
    std::fs::remove_file(&path).ok();
    Ok(())
}
