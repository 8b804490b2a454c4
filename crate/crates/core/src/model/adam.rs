use crate::model::net::{Mlp, MlpGrads};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam over a fixed group of networks. Each group owns its moments, so
/// a network shared by two groups is updated with two independent states.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    t: i32,
    m: Vec<MlpGrads>,
    v: Vec<MlpGrads>,
}

impl Adam {
    pub fn new(lr: f64, nets: &[&Mlp]) -> Self {
        Adam {
            lr,
            t: 0,
            m: nets.iter().map(|n| MlpGrads::zeros_like(n)).collect(),
            v: nets.iter().map(|n| MlpGrads::zeros_like(n)).collect(),
        }
    }

    pub fn step(&mut self, nets: &mut [&mut Mlp], grads: &[&MlpGrads]) {
        assert_eq!(nets.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t);
        let bc2 = 1.0 - BETA2.powi(self.t);
        let lr = self.lr;
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
        };
        for (k, net) in nets.iter_mut().enumerate() {
            for (l, layer) in net.layers.iter_mut().enumerate() {
                let g = &grads[k].layers[l];
                let m = &mut self.m[k].layers[l];
                let v = &mut self.v[k].layers[l];
                ndarray::Zip::from(&mut layer.weights)
                    .and(&g.weights)
                    .and(&mut m.weights)
                    .and(&mut v.weights)
                    .for_each(|p, &g, m, v| update(p, g, m, v));
                ndarray::Zip::from(&mut layer.bias)
                    .and(&g.bias)
                    .and(&mut m.bias)
                    .and(&mut v.bias)
                    .for_each(|p, &g, m, v| update(p, g, m, v));
            }
        }
    }
}
