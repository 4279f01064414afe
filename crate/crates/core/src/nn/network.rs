use super::conv::{conv_backward, conv_forward, conv_t_backward, conv_t_forward};
use super::norm::{bn_backward, bn_forward_eval, bn_forward_train, NormCache};
use super::{ConvGeom, Scalar, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamRole {
    Weight,
    Bias,
    Gamma,
    Beta,
    RunningMean,
    RunningVar,
}

/// A named tensor owned by a network (learnable parameter or buffer).
#[derive(Clone, Debug, PartialEq)]
pub struct Param<T> {
    pub name: String,
    pub shape: Vec<usize>,
    pub role: ParamRole,
    pub data: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Conv { geom: ConvGeom, weight: usize, bias: Option<usize> },
    ConvTranspose { geom: ConvGeom, weight: usize, bias: Option<usize> },
    /// `mean`/`var` index buffers, `gamma`/`beta` parameters.
    BatchNorm { channels: usize, gamma: usize, beta: usize, mean: usize, var: usize },
    Relu,
    LeakyRelu(f64),
    Tanh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics, recorded onto a tape.
    Train,
    /// Running statistics.
    Eval,
}

enum Cache<T> {
    Conv { in_shape: [usize; 4], cols: Vec<T> },
    ConvTranspose { input: Tensor<T> },
    Norm(NormCache<T>),
    Relu { output: Vec<T> },
    LeakyRelu { input: Vec<T> },
    Tanh { output: Vec<T> },
}

/// Activations recorded by a training-mode forward pass.
pub struct Tape<T> {
    caches: Vec<Cache<T>>,
}

/// Gradient buffers, parallel to [`Network::params`].
#[derive(Clone, Debug, PartialEq)]
pub struct Grads<T> {
    pub tensors: Vec<Vec<T>>,
}

impl<T: Scalar> Grads<T> {
    pub fn zero_like(net: &Network<T>) -> Self {
        Grads { tensors: net.params.iter().map(|p| vec![T::zero(); p.data.len()]).collect() }
    }
}

/// A straight-line stack of ops over named parameters and buffers.
#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    pub params: Vec<Param<T>>,
    pub buffers: Vec<Param<T>>,
    pub ops: Vec<Op>,
}

impl<T: Scalar> Network<T> {
    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    /// Parameters followed by buffers, in definition order.
    pub fn tensors(&self) -> impl Iterator<Item = &Param<T>> {
        self.params.iter().chain(&self.buffers)
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Param<T>> {
        self.params.iter_mut().chain(&mut self.buffers)
    }

    /// Inference pass using running statistics.
    pub fn forward(&self, x: &Tensor<T>) -> Tensor<T> {
        let mut cur = x.clone();
        for op in &self.ops {
            cur = match op {
                Op::Conv { geom, weight, bias } => {
                    conv_forward(geom, &cur, &self.params[*weight].data, self.bias(*bias)).0
                }
                Op::ConvTranspose { geom, weight, bias } => {
                    conv_t_forward(geom, &cur, &self.params[*weight].data, self.bias(*bias))
                }
                Op::BatchNorm { channels, gamma, beta, mean, var } => {
                    let data = bn_forward_eval(
                        &cur.data,
                        *channels,
                        &self.params[*gamma].data,
                        &self.params[*beta].data,
                        &self.buffers[*mean].data,
                        &self.buffers[*var].data,
                    );
                    Tensor::from_vec(cur.shape, data)
                }
                Op::Relu => cur.map(|v| v.max(T::zero())),
                Op::LeakyRelu(slope) => {
                    let s = T::lit(*slope);
                    cur.map(|v| if v > T::zero() { v } else { v * s })
                }
                Op::Tanh => cur.map(|v| v.tanh()),
            };
        }
        cur
    }

    pub fn forward_with(&self, x: &Tensor<T>, mode: Mode) -> Tensor<T> {
        match mode {
            Mode::Eval => self.forward(x),
            Mode::Train => self.forward_train(x).0,
        }
    }

    /// Training pass with batch statistics; the tape feeds [`Self::backward`]
    /// and [`Self::update_running_stats`].
    pub fn forward_train(&self, x: &Tensor<T>) -> (Tensor<T>, Tape<T>) {
        let mut caches = Vec::with_capacity(self.ops.len());
        let mut cur = x.clone();
        for op in &self.ops {
            cur = match op {
                Op::Conv { geom, weight, bias } => {
                    let in_shape = cur.shape;
                    let (out, cols) =
                        conv_forward(geom, &cur, &self.params[*weight].data, self.bias(*bias));
                    caches.push(Cache::Conv { in_shape, cols });
                    out
                }
                Op::ConvTranspose { geom, weight, bias } => {
                    let out =
                        conv_t_forward(geom, &cur, &self.params[*weight].data, self.bias(*bias));
                    caches.push(Cache::ConvTranspose { input: cur });
                    out
                }
                Op::BatchNorm { channels, gamma, beta, .. } => {
                    let (y, cache) = bn_forward_train(
                        &cur.data,
                        *channels,
                        &self.params[*gamma].data,
                        &self.params[*beta].data,
                    );
                    caches.push(Cache::Norm(cache));
                    Tensor::from_vec(cur.shape, y)
                }
                Op::Relu => {
                    let out = cur.map(|v| v.max(T::zero()));
                    caches.push(Cache::Relu { output: out.data.clone() });
                    out
                }
                Op::LeakyRelu(slope) => {
                    let s = T::lit(*slope);
                    let input = cur.data.clone();
                    caches.push(Cache::LeakyRelu { input });
                    cur.map(|v| if v > T::zero() { v } else { v * s })
                }
                Op::Tanh => {
                    let out = cur.map(|v| v.tanh());
                    caches.push(Cache::Tanh { output: out.data.clone() });
                    out
                }
            };
        }
        (cur, Tape { caches })
    }

    /// Accumulates parameter gradients into `grads`, returns the input
    /// gradient.
    pub fn backward(&self, tape: &Tape<T>, dy: Tensor<T>, grads: &mut Grads<T>) -> Tensor<T> {
        assert_eq!(tape.caches.len(), self.ops.len(), "tape from another network");
        let mut grad = dy;
        for (op, cache) in self.ops.iter().zip(&tape.caches).rev() {
            grad = match (op, cache) {
                (Op::Conv { geom, weight, bias }, Cache::Conv { in_shape, cols }) => {
                    let (dw, db) = split_grads(grads, *weight, *bias);
                    conv_backward(geom, *in_shape, cols, &self.params[*weight].data, &grad, dw, db)
                }
                (Op::ConvTranspose { geom, weight, bias }, Cache::ConvTranspose { input }) => {
                    let (dw, db) = split_grads(grads, *weight, *bias);
                    conv_t_backward(geom, input, &self.params[*weight].data, &grad, dw, db)
                }
                (Op::BatchNorm { channels, gamma, beta, .. }, Cache::Norm(cache)) => {
                    let (dg, db) = split_grads(grads, *gamma, Some(*beta));
                    let dx = bn_backward(
                        &grad.data,
                        *channels,
                        cache,
                        &self.params[*gamma].data,
                        dg,
                        db.expect("beta gradient"),
                    );
                    Tensor::from_vec(grad.shape, dx)
                }
                (Op::Relu, Cache::Relu { output }) => {
                    for (g, o) in grad.data.iter_mut().zip(output) {
                        if *o <= T::zero() {
                            *g = T::zero();
                        }
                    }
                    grad
                }
                (Op::LeakyRelu(slope), Cache::LeakyRelu { input }) => {
                    let s = T::lit(*slope);
                    for (g, x) in grad.data.iter_mut().zip(input) {
                        if *x <= T::zero() {
                            *g *= s;
                        }
                    }
                    grad
                }
                (Op::Tanh, Cache::Tanh { output }) => {
                    for (g, y) in grad.data.iter_mut().zip(output) {
                        *g *= T::one() - *y * *y;
                    }
                    grad
                }
                _ => unreachable!("tape does not match ops"),
            };
        }
        grad
    }

    /// Exponential moving average of batch statistics into the buffers.
    pub fn update_running_stats(&mut self, tape: &Tape<T>, momentum: f64) {
        let m = T::lit(momentum);
        let keep = T::one() - m;
        for (op, cache) in self.ops.iter().zip(&tape.caches) {
            if let (Op::BatchNorm { mean, var, .. }, Cache::Norm(c)) = (op, cache) {
                for (r, b) in self.buffers[*mean].data.iter_mut().zip(&c.batch_mean) {
                    *r = keep * *r + m * *b;
                }
                for (r, b) in self.buffers[*var].data.iter_mut().zip(&c.batch_var) {
                    *r = keep * *r + m * *b;
                }
            }
        }
    }

    fn bias(&self, idx: Option<usize>) -> Option<&[T]> {
        idx.map(|i| self.params[i].data.as_slice())
    }

    /// Converts element type, e.g. an `f32` model to `f64` for gradient checks.
    pub fn cast<U: Scalar>(&self) -> Network<U> {
        let conv = |p: &Param<T>| Param {
            name: p.name.clone(),
            shape: p.shape.clone(),
            role: p.role,
            data: p.data.iter().map(|v| U::lit(v.as_f64())).collect(),
        };
        Network {
            params: self.params.iter().map(conv).collect(),
            buffers: self.buffers.iter().map(conv).collect(),
            ops: self.ops.clone(),
        }
    }
}

fn split_grads<T>(
    grads: &mut Grads<T>,
    first: usize,
    second: Option<usize>,
) -> (&mut [T], Option<&mut [T]>) {
    match second {
        None => (grads.tensors[first].as_mut_slice(), None),
        Some(second) => {
            assert!(first < second, "parameters are registered in op order");
            let (lo, hi) = grads.tensors.split_at_mut(second);
            (lo[first].as_mut_slice(), Some(hi[0].as_mut_slice()))
        }
    }
}

/// Builds a [`Network`] op by op; tensors start zeroed and are named
/// `<prefix>.<layer>.<tensor>`.
pub struct NetworkBuilder<T> {
    net: Network<T>,
}

impl<T: Scalar> Default for NetworkBuilder<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> NetworkBuilder<T> {
    pub fn new() -> Self {
        NetworkBuilder { net: Network { params: Vec::new(), buffers: Vec::new(), ops: Vec::new() } }
    }

    fn param(&mut self, name: String, shape: Vec<usize>, role: ParamRole) -> usize {
        let len = shape.iter().product();
        self.net.params.push(Param { name, shape, role, data: vec![T::zero(); len] });
        self.net.params.len() - 1
    }

    fn buffer(&mut self, name: String, shape: Vec<usize>, role: ParamRole, fill: T) -> usize {
        let len = shape.iter().product();
        self.net.buffers.push(Param { name, shape, role, data: vec![fill; len] });
        self.net.buffers.len() - 1
    }

    pub fn conv(mut self, name: &str, geom: ConvGeom, bias: bool) -> Self {
        let k = geom.kernel;
        let weight = self.param(
            format!("{name}.weight"),
            vec![k, k, geom.in_ch, geom.out_ch],
            ParamRole::Weight,
        );
        let bias =
            bias.then(|| self.param(format!("{name}.bias"), vec![geom.out_ch], ParamRole::Bias));
        self.net.ops.push(Op::Conv { geom, weight, bias });
        self
    }

    pub fn conv_transpose(mut self, name: &str, geom: ConvGeom, bias: bool) -> Self {
        let k = geom.kernel;
        let weight = self.param(
            format!("{name}.weight"),
            vec![geom.in_ch, k, k, geom.out_ch],
            ParamRole::Weight,
        );
        let bias =
            bias.then(|| self.param(format!("{name}.bias"), vec![geom.out_ch], ParamRole::Bias));
        self.net.ops.push(Op::ConvTranspose { geom, weight, bias });
        self
    }

    pub fn batch_norm(mut self, name: &str, channels: usize) -> Self {
        let gamma = self.param(format!("{name}.gamma"), vec![channels], ParamRole::Gamma);
        let beta = self.param(format!("{name}.beta"), vec![channels], ParamRole::Beta);
        let mean = self.buffer(
            format!("{name}.running_mean"),
            vec![channels],
            ParamRole::RunningMean,
            T::zero(),
        );
        let var = self.buffer(
            format!("{name}.running_var"),
            vec![channels],
            ParamRole::RunningVar,
            T::one(),
        );
        self.net.ops.push(Op::BatchNorm { channels, gamma, beta, mean, var });
        self
    }

    pub fn relu(mut self) -> Self {
        self.net.ops.push(Op::Relu);
        self
    }

    pub fn leaky_relu(mut self, slope: f64) -> Self {
        self.net.ops.push(Op::LeakyRelu(slope));
        self
    }

    pub fn tanh(mut self) -> Self {
        self.net.ops.push(Op::Tanh);
        self
    }

    pub fn build(self) -> Network<T> {
        self.net
    }
}
