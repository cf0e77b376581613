use super::tensor::{gemm_nt, gemm_tn};
use super::{AutodiffError, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    None,
    Relu,
    Sigmoid,
    Tanh,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    AddRow(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    OneMinus(Var),
    Relu(Var),
    Sigmoid(Var),
    Tanh(Var),
    GatherRows(Var, Vec<usize>),
    SegmentSum(Var, Vec<usize>),
    IndexedMatVec(Var, Vec<usize>, Var),
    ConcatCols(Vec<Var>),
    Sum(Var),
    MeanSquaredError(Var, Tensor),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Define-by-run recording of a forward pass.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order of the DAG and [`Tape::backward`] simply walks it in
/// reverse. A tape supports exactly one backward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    consumed: bool,
}

/// Gradients of a scalar loss with respect to every leaf on the tape.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of a leaf. `None` when the loss does not depend on it.
    pub fn get(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(Option::as_ref)
    }

    /// Gradient of a leaf, with zeros substituted when the loss does not depend on it.
    pub fn get_or_zeros(&self, var: Var, shape: (usize, usize)) -> Tensor {
        self.get(var)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(shape.0, shape.1))
    }
}

/// Weights of one GRU cell, already placed on a tape.
#[derive(Debug, Clone, Copy)]
pub struct GruVars {
    pub w_z: Var,
    pub u_z: Var,
    pub b_z: Var,
    pub w_r: Var,
    pub u_r: Var,
    pub b_r: Var,
    pub w_h: Var,
    pub u_h: Var,
    pub b_h: Var,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn shape(&self, var: Var) -> (usize, usize) {
        self.nodes[var.0].value.shape()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    /// A differentiable input (a parameter).
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// A non-differentiable input such as node features.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    fn shape_error(&self, op: &'static str, a: Var, b: Var) -> AutodiffError {
        AutodiffError::Shape {
            op,
            lhs: self.shape(a),
            rhs: self.shape(b),
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let value = self
            .value(a)
            .matmul(self.value(b))
            .map_err(|_| self.shape_error("matmul", a, b))?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(value, Op::MatMul(a, b), rg))
    }

    /// `x + b` with the `1 × m` row `b` broadcast over every row of `x`.
    pub fn add_row(&mut self, x: Var, b: Var) -> Result<Var, AutodiffError> {
        let (xs, bs) = (self.shape(x), self.shape(b));
        if bs.0 != 1 || bs.1 != xs.1 {
            return Err(self.shape_error("add_row", x, b));
        }
        let mut value = self.value(x).clone();
        let bias = self.value(b).data().to_vec();
        for r in 0..xs.0 {
            for (v, bv) in value.row_mut(r).iter_mut().zip(&bias) {
                *v += bv;
            }
        }
        let rg = self.needs(&[x, b]);
        Ok(self.push(value, Op::AddRow(x, b), rg))
    }

    fn zip_with(
        &mut self,
        a: Var,
        b: Var,
        name: &'static str,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var, AutodiffError> {
        if self.shape(a) != self.shape(b) {
            return Err(self.shape_error(name, a, b));
        }
        let (va, vb) = (self.value(a), self.value(b));
        let data = va.data().iter().zip(vb.data()).map(|(&x, &y)| f(x, y)).collect();
        let value = Tensor::new(va.rows(), va.cols(), data)?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(value, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        self.zip_with(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        self.zip_with(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        self.zip_with(a, b, "mul", |x, y| x * y, Op::Mul(a, b))
    }

    fn unary(&mut self, x: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let value = self.value(x).map(f);
        let rg = self.needs(&[x]);
        self.push(value, op, rg)
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        self.unary(x, |v| v * factor, Op::Scale(x, factor))
    }

    /// `1 − x`, elementwise.
    pub fn one_minus(&mut self, x: Var) -> Var {
        self.unary(x, |v| 1.0 - v, Op::OneMinus(x))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        self.unary(x, |v| v.max(0.0), Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.unary(x, logistic, Op::Sigmoid(x))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.unary(x, f64::tanh, Op::Tanh(x))
    }

    pub fn activate(&mut self, x: Var, activation: Activation) -> Var {
        match activation {
            Activation::None => x,
            Activation::Relu => self.relu(x),
            Activation::Sigmoid => self.sigmoid(x),
            Activation::Tanh => self.tanh(x),
        }
    }

    /// `activation(x · w + b)`.
    pub fn dense(&mut self, x: Var, w: Var, b: Var, activation: Activation) -> Result<Var, AutodiffError> {
        let xw = self.matmul(x, w)?;
        let z = self.add_row(xw, b)?;
        Ok(self.activate(z, activation))
    }

    /// Row `i` of the result is row `indices[i]` of `x`.
    pub fn gather_rows(&mut self, x: Var, indices: &[usize]) -> Result<Var, AutodiffError> {
        let src = self.value(x);
        let (rows, cols) = src.shape();
        let mut data = Vec::with_capacity(indices.len() * cols);
        for &i in indices {
            if i >= rows {
                return Err(AutodiffError::IndexOutOfRange { index: i, bound: rows });
            }
            data.extend_from_slice(src.row(i));
        }
        let value = Tensor::new(indices.len(), cols, data)?;
        let rg = self.needs(&[x]);
        Ok(self.push(value, Op::GatherRows(x, indices.to_vec()), rg))
    }

    /// Row `s` of the result is the sum of all rows `i` of `values` with
    /// `segments[i] == s`. Segments that receive no rows are zero.
    pub fn segment_sum(&mut self, values: Var, segments: &[usize], num_segments: usize) -> Result<Var, AutodiffError> {
        let src = self.value(values);
        if segments.len() != src.rows() {
            return Err(AutodiffError::SegmentCount {
                rows: src.rows(),
                segments: segments.len(),
            });
        }
        let mut value = Tensor::zeros(num_segments, src.cols());
        for (r, &s) in segments.iter().enumerate() {
            if s >= num_segments {
                return Err(AutodiffError::IndexOutOfRange {
                    index: s,
                    bound: num_segments,
                });
            }
            for (o, v) in value.row_mut(s).iter_mut().zip(src.row(r)) {
                *o += v;
            }
        }
        let rg = self.needs(&[values]);
        Ok(self.push(value, Op::SegmentSum(values, segments.to_vec()), rg))
    }

    /// Row-wise matrix–vector product: row `e` of `matrices` holds a `d × d`
    /// matrix in row-major order which multiplies row `e` of `vectors`.
    pub fn row_matvec(&mut self, matrices: Var, vectors: Var) -> Result<Var, AutodiffError> {
        let rows = self.shape(vectors).0;
        if self.shape(matrices).0 != rows {
            return Err(self.shape_error("row_matvec", matrices, vectors));
        }
        self.indexed_matvec(matrices, &(0..rows).collect::<Vec<_>>(), vectors)
    }

    /// Like [`Tape::row_matvec`], but row `e` of `vectors` is multiplied by
    /// matrix `indices[e]` of `table`. Lets many rows share one matrix
    /// without materializing a copy per row.
    pub fn indexed_matvec(&mut self, table: Var, indices: &[usize], vectors: Var) -> Result<Var, AutodiffError> {
        let (ts, vs) = (self.shape(table), self.shape(vectors));
        let d = vs.1;
        if ts.1 != d * d || indices.len() != vs.0 {
            return Err(self.shape_error("indexed_matvec", table, vectors));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= ts.0) {
            return Err(AutodiffError::IndexOutOfRange {
                index: bad,
                bound: ts.0,
            });
        }
        let (tv, vv) = (self.value(table), self.value(vectors));
        let mut value = Tensor::zeros(vs.0, d);
        for (e, &k) in indices.iter().enumerate() {
            let m = tv.row(k);
            let x = vv.row(e);
            for (i, o) in value.row_mut(e).iter_mut().enumerate() {
                *o = m[i * d..(i + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum();
            }
        }
        let rg = self.needs(&[table, vectors]);
        Ok(self.push(value, Op::IndexedMatVec(table, indices.to_vec(), vectors), rg))
    }

    /// Horizontal concatenation of tensors with equal row counts.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, AutodiffError> {
        let rows = parts.first().map_or(0, |&p| self.shape(p).0);
        if let Some(&bad) = parts.iter().find(|&&p| self.shape(p).0 != rows) {
            return Err(self.shape_error("concat_cols", parts[0], bad));
        }
        let cols: usize = parts.iter().map(|&p| self.shape(p).1).sum();
        let mut value = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for &p in parts {
                let src = self.nodes[p.0].value.row(r);
                value.row_mut(r)[offset..offset + src.len()].copy_from_slice(src);
                offset += src.len();
            }
        }
        let rg = self.needs(parts);
        Ok(self.push(value, Op::ConcatCols(parts.to_vec()), rg))
    }

    /// Sum of all entries, as a `1 × 1` tensor.
    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        let rg = self.needs(&[x]);
        self.push(Tensor::scalar(s), Op::Sum(x), rg)
    }

    /// Mean of squared differences against a fixed target.
    pub fn mse(&mut self, prediction: Var, target: &Tensor) -> Result<Var, AutodiffError> {
        let p = self.value(prediction);
        if p.shape() != target.shape() {
            return Err(AutodiffError::Shape {
                op: "mse",
                lhs: p.shape(),
                rhs: target.shape(),
            });
        }
        let n = p.len().max(1) as f64;
        let loss = p
            .data()
            .iter()
            .zip(target.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n;
        let rg = self.needs(&[prediction]);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::MeanSquaredError(prediction, target.clone()),
            rg,
        ))
    }

    /// Standard GRU update with `m` as the input and `h` as the previous state:
    ///
    /// ```text
    /// z  = σ(m W_z + h U_z + b_z)
    /// r  = σ(m W_r + h U_r + b_r)
    /// ĥ  = tanh(m W_h + (r ⊙ h) U_h + b_h)
    /// h' = (1 − z) ⊙ h + z ⊙ ĥ
    /// ```
    pub fn gru_cell(&mut self, h: Var, m: Var, p: &GruVars) -> Result<Var, AutodiffError> {
        if self.shape(h) != self.shape(m) {
            return Err(self.shape_error("gru_cell", h, m));
        }
        let gate = |tape: &mut Tape, w: Var, u: Var, b: Var, state: Var| -> Result<Var, AutodiffError> {
            let mw = tape.matmul(m, w)?;
            let hu = tape.matmul(state, u)?;
            let s = tape.add(mw, hu)?;
            tape.add_row(s, b)
        };
        let z_pre = gate(self, p.w_z, p.u_z, p.b_z, h)?;
        let z = self.sigmoid(z_pre);
        let r_pre = gate(self, p.w_r, p.u_r, p.b_r, h)?;
        let r = self.sigmoid(r_pre);
        let rh = self.mul(r, h)?;
        let cand_pre = gate(self, p.w_h, p.u_h, p.b_h, rh)?;
        let cand = self.tanh(cand_pre);
        let keep = self.one_minus(z);
        let kept = self.mul(keep, h)?;
        let fresh = self.mul(z, cand)?;
        self.add(kept, fresh)
    }

    /// Reverse pass from a scalar loss. Consumes the tape's single backward.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients, AutodiffError> {
        if self.consumed {
            return Err(AutodiffError::TapeReused);
        }
        let shape = self.shape(loss);
        if shape != (1, 1) {
            return Err(AutodiffError::NonScalarLoss { shape });
        }
        self.consumed = true;

        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::scalar(1.0));
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            self.propagate(idx, &g, &mut grads);
            if matches!(node.op, Op::Leaf) {
                grads[idx] = Some(g);
            }
        }
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Tensor>], var: Var, g: Tensor) {
        if !self.nodes[var.0].requires_grad {
            return;
        }
        match &mut grads[var.0] {
            Some(acc) => acc.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    fn propagate(&self, idx: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let node = &self.nodes[idx];
        let out = &node.value;
        match &node.op {
            Op::Leaf => {}
            &Op::MatMul(a, b) => {
                let (va, vb) = (self.value(a), self.value(b));
                if self.nodes[a.0].requires_grad {
                    let mut ga = Tensor::zeros(va.rows(), va.cols());
                    gemm_nt(g, vb, &mut ga);
                    self.accumulate(grads, a, ga);
                }
                if self.nodes[b.0].requires_grad {
                    let mut gb = Tensor::zeros(vb.rows(), vb.cols());
                    gemm_tn(va, g, &mut gb);
                    self.accumulate(grads, b, gb);
                }
            }
            &Op::AddRow(x, b) => {
                let mut gb = Tensor::zeros(1, g.cols());
                for r in 0..g.rows() {
                    for (o, v) in gb.data_mut().iter_mut().zip(g.row(r)) {
                        *o += v;
                    }
                }
                self.accumulate(grads, x, g.clone());
                self.accumulate(grads, b, gb);
            }
            &Op::Add(a, b) => {
                self.accumulate(grads, a, g.clone());
                self.accumulate(grads, b, g.clone());
            }
            &Op::Sub(a, b) => {
                self.accumulate(grads, a, g.clone());
                self.accumulate(grads, b, g.map(|v| -v));
            }
            &Op::Mul(a, b) => {
                let (va, vb) = (self.value(a), self.value(b));
                self.accumulate(grads, a, hadamard(g, vb));
                self.accumulate(grads, b, hadamard(g, va));
            }
            &Op::Scale(x, c) => self.accumulate(grads, x, g.map(|v| v * c)),
            &Op::OneMinus(x) => self.accumulate(grads, x, g.map(|v| -v)),
            &Op::Relu(x) => {
                let vx = self.value(x);
                let data = g
                    .data()
                    .iter()
                    .zip(vx.data())
                    .map(|(&gv, &xv)| if xv > 0.0 { gv } else { 0.0 });
                self.accumulate(grads, x, from_iter(g, data));
            }
            &Op::Sigmoid(x) => {
                let data = g.data().iter().zip(out.data()).map(|(&gv, &y)| gv * y * (1.0 - y));
                self.accumulate(grads, x, from_iter(g, data));
            }
            &Op::Tanh(x) => {
                let data = g.data().iter().zip(out.data()).map(|(&gv, &y)| gv * (1.0 - y * y));
                self.accumulate(grads, x, from_iter(g, data));
            }
            Op::GatherRows(x, indices) => {
                let (rows, cols) = self.shape(*x);
                let mut gx = Tensor::zeros(rows, cols);
                for (r, &i) in indices.iter().enumerate() {
                    for (o, v) in gx.row_mut(i).iter_mut().zip(g.row(r)) {
                        *o += v;
                    }
                }
                self.accumulate(grads, *x, gx);
            }
            Op::SegmentSum(x, segments) => {
                let cols = g.cols();
                let mut data = Vec::with_capacity(segments.len() * cols);
                for &s in segments {
                    data.extend_from_slice(g.row(s));
                }
                let gx = Tensor::new(segments.len(), cols, data).expect("segment gradient shape");
                self.accumulate(grads, *x, gx);
            }
            Op::IndexedMatVec(m, indices, x) => {
                let (m, x) = (*m, *x);
                let (vm, vx) = (self.value(m), self.value(x));
                let d = vx.cols();
                if self.nodes[m.0].requires_grad {
                    let mut gm = Tensor::zeros(vm.rows(), vm.cols());
                    for (e, &k) in indices.iter().enumerate() {
                        let (ge, xe) = (g.row(e), vx.row(e));
                        let row = gm.row_mut(k);
                        for i in 0..d {
                            for j in 0..d {
                                row[i * d + j] += ge[i] * xe[j];
                            }
                        }
                    }
                    self.accumulate(grads, m, gm);
                }
                if self.nodes[x.0].requires_grad {
                    let mut gx = Tensor::zeros(vx.rows(), d);
                    for (e, &k) in indices.iter().enumerate() {
                        let (ge, me) = (g.row(e), vm.row(k));
                        let row = gx.row_mut(e);
                        for i in 0..d {
                            let gi = ge[i];
                            for j in 0..d {
                                row[j] += me[i * d + j] * gi;
                            }
                        }
                    }
                    self.accumulate(grads, x, gx);
                }
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let (rows, cols) = self.shape(p);
                    let mut gp = Tensor::zeros(rows, cols);
                    for r in 0..rows {
                        gp.row_mut(r).copy_from_slice(&g.row(r)[offset..offset + cols]);
                    }
                    offset += cols;
                    self.accumulate(grads, p, gp);
                }
            }
            &Op::Sum(x) => {
                let (rows, cols) = self.shape(x);
                self.accumulate(grads, x, Tensor::filled(rows, cols, g.data()[0]));
            }
            Op::MeanSquaredError(p, target) => {
                let vp = self.value(*p);
                let scale = 2.0 * g.data()[0] / vp.len().max(1) as f64;
                let data = vp.data().iter().zip(target.data()).map(|(a, b)| scale * (a - b));
                self.accumulate(grads, *p, from_iter(vp, data));
            }
        }
    }
}

fn logistic(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn hadamard(a: &Tensor, b: &Tensor) -> Tensor {
    from_iter(a, a.data().iter().zip(b.data()).map(|(x, y)| x * y))
}

fn from_iter(like: &Tensor, data: impl Iterator<Item = f64>) -> Tensor {
    Tensor::new(like.rows(), like.cols(), data.collect()).expect("elementwise shape")
}
