//! Parameter and MAC counts for the default NTU network, next to the
//! GCN + TCN baseline with the same channel plan and scales.

use mstgn::graphs::ScaleName;
use mstgn::model::{count_flops, count_params, InputShape, ModelConfig, TgnModel};

fn report(label: &str, config: ModelConfig) -> mstgn::Result<()> {
    let model = TgnModel::from_config(config, 0)?;
    let params = count_params(&model);
    let macs = count_flops(&model, InputShape::clip(2))?;
    println!(
        "{label:<28} params {:>10}  MACs {:>7.3} G  (mixing {:.3} G, conv {:.3} G)",
        params.total,
        macs.total as f64 / 1e9,
        macs.graph_mixing as f64 / 1e9,
        macs.convolution as f64 / 1e9,
    );
    Ok(())
}

fn main() -> mstgn::Result<()> {
    let tgn = ModelConfig::ntu25_default();
    report("ms-tgn (t=3)", tgn.clone())?;
    report("gcn+tcn baseline (t=9)", tgn.as_baseline(9))?;
    let mut single = tgn.as_baseline(9);
    single.scales = vec![ScaleName::Full];
    report("single-scale baseline (t=9)", single)?;

    let model = TgnModel::from_config(tgn, 0)?;
    for item in count_flops(&model, InputShape::clip(2))?.per_layer {
        println!("  {:<12} {:>14}", item.name, item.count);
    }
    Ok(())
}
