use fpl_core::data::{synth_1d, SynthSpec};
use fpl_core::nn::{
    load_network, save_network, train, Activation, Control, LossKind, Network, OptimizerKind, OutputHead, Supervised,
    Targets, TrainConfig,
};
use fpl_core::Matrix;

fn config(epochs: usize) -> TrainConfig {
    TrainConfig {
        loss: LossKind::Mse,
        optimizer: OptimizerKind::Adam,
        learning_rate: 1e-2,
        batch_size: None,
        epochs,
        init_std: 0.3,
        seed: 4,
        record_every: 10,
    }
}

fn fit(epochs: usize) -> (Network<f64>, Vec<f64>) {
    let mut spec = SynthSpec::intro();
    spec.n = 41;
    let data = synth_1d::<f64>(&spec).unwrap();
    let tc = config(epochs);
    let mut net = Network::init(&[1, 20, 1], Activation::Tanh, OutputHead::Linear, tc.init_std, tc.seed).unwrap();
    let objective = Supervised::new(&data.inputs, Targets::Values(&data.labels), tc.loss);
    let trace = train(&mut net, &objective, &tc, None, &mut []).unwrap();
    (net, trace.losses)
}

#[test]
fn training_reduces_the_loss() {
    let (_, losses) = fit(400);
    assert!(losses.last().unwrap() < &(0.2 * losses[0]), "{losses:?}");
}

#[test]
fn training_is_deterministic() {
    let (a, la) = fit(50);
    let (b, lb) = fit(50);
    assert_eq!(a.params(), b.params());
    assert_eq!(la, lb);
}

#[test]
fn probes_see_epoch_zero_and_can_stop() {
    let data = synth_1d::<f64>(&SynthSpec::intro()).unwrap();
    let tc = config(100);
    let mut net = Network::init(&[1, 8, 1], Activation::Tanh, OutputHead::Linear, 0.3, 1).unwrap();
    let objective = Supervised::new(&data.inputs, Targets::Values(&data.labels), tc.loss);
    let mut seen = Vec::new();
    let mut probe = |epoch: usize, _: &Network<f64>, snap: Option<&Matrix>| -> fpl_core::Result<Control> {
        assert_eq!(snap.unwrap().rows(), data.len());
        seen.push(epoch);
        Ok(if epoch >= 30 { Control::Stop } else { Control::Continue })
    };
    let trace = train(&mut net, &objective, &tc, Some(&data.inputs), &mut [&mut probe]).unwrap();
    assert_eq!(seen, vec![0, 10, 20, 30]);
    assert_eq!(trace.stopped_at, Some(30));
}

#[test]
fn saved_network_round_trips() {
    let (net, _) = fit(5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.bin");
    save_network(&net, &path).unwrap();
    let back: Network<f64> = load_network(&path).unwrap();
    assert_eq!(back.params(), net.params());
    assert_eq!(back.widths(), net.widths());
}

#[test]
fn single_precision_training_runs() {
    let data = synth_1d::<f32>(&SynthSpec::intro()).unwrap();
    let tc = config(100);
    let mut net = Network::<f32>::init(&[1, 10, 1], Activation::Tanh, OutputHead::Linear, 0.3, 2).unwrap();
    let objective = Supervised::new(&data.inputs, Targets::Values(&data.labels), tc.loss);
    let trace = train(&mut net, &objective, &tc, None, &mut []).unwrap();
    assert!(trace.final_loss().unwrap() < trace.losses[0]);
}
