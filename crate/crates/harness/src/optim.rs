use ndarray::Zip;

use crate::mlp::Mlp;

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Mlp,
    v: Mlp,
}

impl Adam {
    pub fn new(model: &Mlp, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: model.zeros_like(),
            v: model.zeros_like(),
        }
    }

    pub fn step(&mut self, model: &mut Mlp, grads: &Mlp) {
        self.t += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let lr = self.lr;
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: &f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (i, layer) in model.layers.iter_mut().enumerate() {
            Zip::from(&mut layer.w)
                .and(&mut self.m.layers[i].w)
                .and(&mut self.v.layers[i].w)
                .and(&grads.layers[i].w)
                .for_each(update);
            Zip::from(&mut layer.b)
                .and(&mut self.m.layers[i].b)
                .and(&mut self.v.layers[i].b)
                .and(&grads.layers[i].b)
                .for_each(update);
        }
    }
}
