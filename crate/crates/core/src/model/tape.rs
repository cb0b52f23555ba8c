//! Tape-based reverse-mode differentiation over dense f64 vectors and matrices.
//!
//! Every node stores its value; [`Tape::backward`] walks the tape once in
//! reverse and returns the gradient of a scalar node with respect to every node
//! that depends on a differentiable leaf. Leaves may borrow their storage, so
//! registering the model's parameters costs nothing.
//!
//! Shapes are `(rows, cols)`; vectors are `(1, n)`.

use std::borrow::Cow;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    /// `m (r×c) · x (c)`
    MatVec(Var, Var),
    /// `x (t×c) · wᵀ` with `w (r×c)`
    MatMulT(Var, Var),
    /// `Σ_t a[t] · x[t, :]`
    RowWeightedSum(Var, Var),
    Add(Var, Var),
    /// Adds a bias vector to every row.
    AddRowBias(Var, Var),
    Mul(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    Slice(Var, usize),
    Row(Var, usize),
    Concat(Vec<Var>),
    StackRows(Vec<Var>),
    Softmax(Var),
    Gather(Var, Vec<usize>),
    /// Sliding windows of `width` consecutive rows, flattened.
    Unfold(Var, usize),
    /// Column-wise max over rows; stores the winning row per column.
    MaxRows(Var, Vec<usize>),
    /// Masked, clamped binary cross-entropy of `sigmoid(logits)` against targets.
    SigmoidBce {
        logits: Var,
        targets: Vec<f64>,
        mask: Vec<bool>,
    },
    Sum(Vec<Var>),
}

struct Node<'a> {
    op: Op,
    value: Cow<'a, [f64]>,
    rows: usize,
    cols: usize,
    needs_grad: bool,
}

/// Probability clamp used inside the loss.
pub const PROB_EPS: f64 = 1e-7;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Masked, clamped binary cross-entropy summed over the unmasked entries.
pub fn masked_bce(probs: &[f64], targets: &[f64], mask: &[bool]) -> f64 {
    let mut total = 0.0;
    for ((&y, &t), &m) in probs.iter().zip(targets).zip(mask) {
        if m {
            let y = y.clamp(PROB_EPS, 1.0 - PROB_EPS);
            total -= t * y.ln() + (1.0 - t) * (1.0 - y).ln();
        }
    }
    total
}

#[derive(Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Vec<f64>, rows: usize, cols: usize, needs_grad: bool) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node {
            op,
            value: Cow::Owned(value),
            rows,
            cols,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn leaf(&mut self, value: Cow<'a, [f64]>, rows: usize, cols: usize, needs_grad: bool) -> Var {
        assert_eq!(value.len(), rows * cols, "leaf value does not match its shape");
        self.nodes.push(Node {
            op: Op::Leaf,
            value,
            rows,
            cols,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Differentiable leaf borrowing its storage.
    pub fn param(&mut self, value: &'a [f64], rows: usize, cols: usize) -> Var {
        self.leaf(Cow::Borrowed(value), rows, cols, true)
    }

    /// Non-differentiable leaf.
    pub fn constant(&mut self, value: Cow<'a, [f64]>, rows: usize, cols: usize) -> Var {
        self.leaf(value, rows, cols, false)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let n = &self.nodes[v.0];
        (n.rows, n.cols)
    }

    fn needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].needs_grad)
    }

    pub fn matvec(&mut self, m: Var, x: Var) -> Var {
        let (r, c) = self.shape(m);
        let xv = self.value(x);
        assert_eq!(xv.len(), c, "matvec: {r}x{c} matrix times vector of {}", xv.len());
        let mv = self.value(m);
        let out: Vec<f64> = (0..r)
            .map(|i| mv[i * c..(i + 1) * c].iter().zip(xv).map(|(a, b)| a * b).sum())
            .collect();
        let ng = self.needs(&[m, x]);
        self.push(Op::MatVec(m, x), out, 1, r, ng)
    }

    pub fn matmul_t(&mut self, x: Var, w: Var) -> Var {
        let (t, c) = self.shape(x);
        let (r, wc) = self.shape(w);
        assert_eq!(c, wc, "matmul_t: {t}x{c} times ({r}x{wc})ᵀ");
        let xv = self.value(x);
        let wv = self.value(w);
        let mut out = vec![0.0; t * r];
        for ti in 0..t {
            let xr = &xv[ti * c..(ti + 1) * c];
            for ri in 0..r {
                out[ti * r + ri] = xr.iter().zip(&wv[ri * c..(ri + 1) * c]).map(|(a, b)| a * b).sum();
            }
        }
        let ng = self.needs(&[x, w]);
        self.push(Op::MatMulT(x, w), out, t, r, ng)
    }

    pub fn row_weighted_sum(&mut self, x: Var, a: Var) -> Var {
        let (t, c) = self.shape(x);
        let av = self.value(a);
        assert_eq!(av.len(), t, "row_weighted_sum: {t} rows, {} weights", av.len());
        let xv = self.value(x);
        let mut out = vec![0.0; c];
        for ti in 0..t {
            for (o, xv) in out.iter_mut().zip(&xv[ti * c..(ti + 1) * c]) {
                *o += av[ti] * xv;
            }
        }
        let ng = self.needs(&[x, a]);
        self.push(Op::RowWeightedSum(x, a), out, 1, c, ng)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let (r, c) = self.shape(a);
        assert_eq!(self.value(a).len(), self.value(b).len(), "add: length mismatch");
        let out = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x + y).collect();
        let ng = self.needs(&[a, b]);
        self.push(Op::Add(a, b), out, r, c, ng)
    }

    pub fn add_row_bias(&mut self, x: Var, b: Var) -> Var {
        let (t, c) = self.shape(x);
        let bv = self.value(b);
        assert_eq!(bv.len(), c, "add_row_bias: {c} columns, bias of {}", bv.len());
        let mut out = self.value(x).to_vec();
        for row in out.chunks_exact_mut(c) {
            for (o, b) in row.iter_mut().zip(bv) {
                *o += b;
            }
        }
        let ng = self.needs(&[x, b]);
        self.push(Op::AddRowBias(x, b), out, t, c, ng)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (r, c) = self.shape(a);
        assert_eq!(self.value(a).len(), self.value(b).len(), "mul: length mismatch");
        let out = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).collect();
        let ng = self.needs(&[a, b]);
        self.push(Op::Mul(a, b), out, r, c, ng)
    }

    fn unary(&mut self, x: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let (r, c) = self.shape(x);
        let out = self.value(x).iter().map(|&v| f(v)).collect();
        let ng = self.needs(&[x]);
        self.push(op, out, r, c, ng)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.unary(x, Op::Sigmoid(x), sigmoid)
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.unary(x, Op::Tanh(x), f64::tanh)
    }

    pub fn relu(&mut self, x: Var) -> Var {
        self.unary(x, Op::Relu(x), |v| v.max(0.0))
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Var {
        let out = self.value(x)[start..start + len].to_vec();
        let ng = self.needs(&[x]);
        self.push(Op::Slice(x, start), out, 1, len, ng)
    }

    pub fn row(&mut self, x: Var, r: usize) -> Var {
        let (rows, c) = self.shape(x);
        assert!(r < rows, "row {r} of a {rows}-row matrix");
        let out = self.value(x)[r * c..(r + 1) * c].to_vec();
        let ng = self.needs(&[x]);
        self.push(Op::Row(x, r), out, 1, c, ng)
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let mut out = Vec::new();
        for p in parts {
            out.extend_from_slice(self.value(*p));
        }
        let n = out.len();
        let ng = self.needs(parts);
        self.push(Op::Concat(parts.to_vec()), out, 1, n, ng)
    }

    pub fn stack_rows(&mut self, rows: &[Var]) -> Var {
        assert!(!rows.is_empty(), "stack_rows of nothing");
        let c = self.value(rows[0]).len();
        let mut out = Vec::with_capacity(rows.len() * c);
        for r in rows {
            let v = self.value(*r);
            assert_eq!(v.len(), c, "stack_rows: ragged rows");
            out.extend_from_slice(v);
        }
        let ng = self.needs(rows);
        self.push(Op::StackRows(rows.to_vec()), out, rows.len(), c, ng)
    }

    pub fn softmax(&mut self, x: Var) -> Var {
        let xv = self.value(x);
        let max = xv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = xv.iter().map(|v| (v - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let out: Vec<f64> = exps.into_iter().map(|e| e / z).collect();
        let n = out.len();
        let ng = self.needs(&[x]);
        self.push(Op::Softmax(x), out, 1, n, ng)
    }

    pub fn gather(&mut self, table: Var, ids: &[usize]) -> Var {
        let (rows, c) = self.shape(table);
        let tv = self.value(table);
        let mut out = Vec::with_capacity(ids.len() * c);
        for &id in ids {
            assert!(id < rows, "gather: row {id} of {rows}");
            out.extend_from_slice(&tv[id * c..(id + 1) * c]);
        }
        let ng = self.needs(&[table]);
        self.push(Op::Gather(table, ids.to_vec()), out, ids.len(), c, ng)
    }

    pub fn unfold(&mut self, x: Var, width: usize) -> Var {
        let (rows, c) = self.shape(x);
        assert!(width >= 1 && width <= rows, "unfold: width {width} over {rows} rows");
        let positions = rows - width + 1;
        let xv = self.value(x);
        let mut out = Vec::with_capacity(positions * width * c);
        for p in 0..positions {
            out.extend_from_slice(&xv[p * c..(p + width) * c]);
        }
        let ng = self.needs(&[x]);
        self.push(Op::Unfold(x, width), out, positions, width * c, ng)
    }

    /// Column-wise max over rows; ties go to the first row.
    pub fn max_rows(&mut self, x: Var) -> Var {
        let (rows, c) = self.shape(x);
        let xv = self.value(x);
        let mut arg = vec![0usize; c];
        let mut out = xv[..c].to_vec();
        for r in 1..rows {
            for j in 0..c {
                let v = xv[r * c + j];
                if v > out[j] {
                    out[j] = v;
                    arg[j] = r;
                }
            }
        }
        let ng = self.needs(&[x]);
        self.push(Op::MaxRows(x, arg), out, 1, c, ng)
    }

    /// Scalar loss `Σ_{mask} BCE(sigmoid(logits), targets)` with probabilities
    /// clamped to `[PROB_EPS, 1 - PROB_EPS]`.
    pub fn sigmoid_bce(&mut self, logits: Var, targets: Vec<f64>, mask: Vec<bool>) -> Var {
        let lv = self.value(logits);
        assert_eq!(lv.len(), targets.len(), "sigmoid_bce: logits/targets length");
        assert_eq!(lv.len(), mask.len(), "sigmoid_bce: logits/mask length");
        let probs: Vec<f64> = lv.iter().map(|&z| sigmoid(z)).collect();
        let loss = masked_bce(&probs, &targets, &mask);
        let ng = self.needs(&[logits]);
        self.push(Op::SigmoidBce { logits, targets, mask }, vec![loss], 1, 1, ng)
    }

    pub fn sum(&mut self, scalars: &[Var]) -> Var {
        let total = scalars.iter().map(|s| self.value(*s)[0]).sum();
        let ng = self.needs(scalars);
        self.push(Op::Sum(scalars.to_vec()), vec![total], 1, 1, ng)
    }

    /// Gradients of the scalar `output` with respect to every node.
    pub fn backward(&self, output: Var) -> Gradients {
        assert_eq!(self.value(output).len(), 1, "backward from a non-scalar node");
        let mut grads: Vec<Option<Vec<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(vec![1.0]);

        for k in (0..=output.0).rev() {
            let Some(g) = grads[k].take() else { continue };
            let node = &self.nodes[k];
            if !node.needs_grad {
                grads[k] = Some(g);
                continue;
            }
            self.propagate(node, &g, &mut grads);
            grads[k] = Some(g);
        }
        Gradients { grads }
    }

    fn propagate(&self, node: &Node<'a>, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let nodes = &self.nodes;
        // Runs `$body` with `$gx` bound to the input's gradient buffer
        // (allocated on first use); skipped for inputs without gradients.
        macro_rules! with_grad {
            ($v:expr, |$gx:ident| $body:block) => {{
                let input = &nodes[$v.0];
                if input.needs_grad {
                    let $gx: &mut [f64] = grads[$v.0]
                        .get_or_insert_with(|| vec![0.0; input.value.len()])
                        .as_mut_slice();
                    $body
                }
            }};
        }

        match &node.op {
            Op::Leaf => {}
            Op::MatVec(m, x) => {
                let (r, c) = (nodes[m.0].rows, nodes[m.0].cols);
                let mv = &nodes[m.0].value;
                let xv = &nodes[x.0].value;
                with_grad!(*m, |gm| {
                    for i in 0..r {
                        if g[i] == 0.0 {
                            continue;
                        }
                        for (gmj, xj) in gm[i * c..(i + 1) * c].iter_mut().zip(xv.iter()) {
                            *gmj += g[i] * xj;
                        }
                    }
                });
                with_grad!(*x, |gx| {
                    for i in 0..r {
                        for (gxj, mij) in gx.iter_mut().zip(&mv[i * c..(i + 1) * c]) {
                            *gxj += g[i] * mij;
                        }
                    }
                });
            }
            Op::MatMulT(x, w) => {
                let (t, c) = (nodes[x.0].rows, nodes[x.0].cols);
                let r = nodes[w.0].rows;
                let xv = &nodes[x.0].value;
                let wv = &nodes[w.0].value;
                with_grad!(*x, |gx| {
                    for ti in 0..t {
                        for ri in 0..r {
                            let gg = g[ti * r + ri];
                            for (gxj, wj) in gx[ti * c..(ti + 1) * c].iter_mut().zip(&wv[ri * c..(ri + 1) * c]) {
                                *gxj += gg * wj;
                            }
                        }
                    }
                });
                with_grad!(*w, |gw| {
                    for ti in 0..t {
                        for ri in 0..r {
                            let gg = g[ti * r + ri];
                            for (gwj, xj) in gw[ri * c..(ri + 1) * c].iter_mut().zip(&xv[ti * c..(ti + 1) * c]) {
                                *gwj += gg * xj;
                            }
                        }
                    }
                });
            }
            Op::RowWeightedSum(x, a) => {
                let (t, c) = (nodes[x.0].rows, nodes[x.0].cols);
                let xv = &nodes[x.0].value;
                let av = &nodes[a.0].value;
                with_grad!(*x, |gx| {
                    for ti in 0..t {
                        for (gxj, gj) in gx[ti * c..(ti + 1) * c].iter_mut().zip(g) {
                            *gxj += av[ti] * gj;
                        }
                    }
                });
                with_grad!(*a, |ga| {
                    for ti in 0..t {
                        ga[ti] += xv[ti * c..(ti + 1) * c].iter().zip(g).map(|(x, g)| x * g).sum::<f64>();
                    }
                });
            }
            Op::Add(a, b) => {
                for v in [a, b] {
                    with_grad!(*v, |gv| {
                        for (o, gi) in gv.iter_mut().zip(g) {
                            *o += gi;
                        }
                    });
                }
            }
            Op::AddRowBias(x, b) => {
                let c = nodes[x.0].cols;
                with_grad!(*x, |gx| {
                    for (o, gi) in gx.iter_mut().zip(g) {
                        *o += gi;
                    }
                });
                with_grad!(*b, |gb| {
                    for row in g.chunks_exact(c) {
                        for (o, gi) in gb.iter_mut().zip(row) {
                            *o += gi;
                        }
                    }
                });
            }
            Op::Mul(a, b) => {
                let av = &nodes[a.0].value;
                let bv = &nodes[b.0].value;
                with_grad!(*a, |ga| {
                    for i in 0..g.len() {
                        ga[i] += g[i] * bv[i];
                    }
                });
                with_grad!(*b, |gb| {
                    for i in 0..g.len() {
                        gb[i] += g[i] * av[i];
                    }
                });
            }
            Op::Sigmoid(x) => {
                let y = &node.value;
                with_grad!(*x, |gx| {
                    for i in 0..g.len() {
                        gx[i] += g[i] * y[i] * (1.0 - y[i]);
                    }
                });
            }
            Op::Tanh(x) => {
                let y = &node.value;
                with_grad!(*x, |gx| {
                    for i in 0..g.len() {
                        gx[i] += g[i] * (1.0 - y[i] * y[i]);
                    }
                });
            }
            Op::Relu(x) => {
                let y = &node.value;
                with_grad!(*x, |gx| {
                    for i in 0..g.len() {
                        if y[i] > 0.0 {
                            gx[i] += g[i];
                        }
                    }
                });
            }
            Op::Slice(x, start) => {
                with_grad!(*x, |gx| {
                    for (o, gi) in gx[*start..*start + g.len()].iter_mut().zip(g) {
                        *o += gi;
                    }
                });
            }
            Op::Row(x, r) => {
                let c = g.len();
                with_grad!(*x, |gx| {
                    for (o, gi) in gx[r * c..(r + 1) * c].iter_mut().zip(g) {
                        *o += gi;
                    }
                });
            }
            Op::Concat(parts) => {
                let mut offset = 0;
                for p in parts {
                    let n = nodes[p.0].value.len();
                    with_grad!(*p, |gp| {
                        for (o, gi) in gp.iter_mut().zip(&g[offset..offset + n]) {
                            *o += gi;
                        }
                    });
                    offset += n;
                }
            }
            Op::StackRows(rows) => {
                let c = node.cols;
                for (r, p) in rows.iter().enumerate() {
                    with_grad!(*p, |gp| {
                        for (o, gi) in gp.iter_mut().zip(&g[r * c..(r + 1) * c]) {
                            *o += gi;
                        }
                    });
                }
            }
            Op::Softmax(x) => {
                let y = &node.value;
                let dot: f64 = g.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
                with_grad!(*x, |gx| {
                    for i in 0..g.len() {
                        gx[i] += y[i] * (g[i] - dot);
                    }
                });
            }
            Op::Gather(table, ids) => {
                let c = node.cols;
                with_grad!(*table, |gt| {
                    for (r, &id) in ids.iter().enumerate() {
                        for (o, gi) in gt[id * c..(id + 1) * c].iter_mut().zip(&g[r * c..(r + 1) * c]) {
                            *o += gi;
                        }
                    }
                });
            }
            Op::Unfold(x, width) => {
                let c = nodes[x.0].cols;
                let span = width * c;
                with_grad!(*x, |gx| {
                    for (p, window) in g.chunks_exact(span).enumerate() {
                        for (o, gi) in gx[p * c..p * c + span].iter_mut().zip(window) {
                            *o += gi;
                        }
                    }
                });
            }
            Op::MaxRows(x, arg) => {
                let c = node.cols;
                with_grad!(*x, |gx| {
                    for j in 0..c {
                        gx[arg[j] * c + j] += g[j];
                    }
                });
            }
            Op::SigmoidBce { logits, targets, mask } => {
                let lv = &nodes[logits.0].value;
                with_grad!(*logits, |gl| {
                    for i in 0..lv.len() {
                        if !mask[i] {
                            continue;
                        }
                        let y = sigmoid(lv[i]);
                        // d/dz of the clamped loss vanishes outside the clamp range.
                        if y > PROB_EPS && y < 1.0 - PROB_EPS {
                            gl[i] += g[0] * (y - targets[i]);
                        }
                    }
                });
            }
            Op::Sum(parts) => {
                for p in parts {
                    with_grad!(*p, |gp| {
                        gp[0] += g[0];
                    });
                }
            }
        }
    }
}

pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    /// Gradient of a node, or `None` when it does not influence the output
    /// through a differentiable path.
    pub fn get(&self, v: Var) -> Option<&[f64]> {
        self.grads[v.0].as_deref()
    }

    pub fn take(&mut self, v: Var) -> Option<Vec<f64>> {
        self.grads[v.0].take()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central differences of a scalar function of one leaf.
    fn numeric(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut p = x.to_vec();
                p[i] += h;
                let mut m = x.to_vec();
                m[i] -= h;
                (f(&p) - f(&m)) / (2.0 * h)
            })
            .collect()
    }

    fn assert_close(a: &[f64], b: &[f64]) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-6 * (1.0 + x.abs()), "{a:?} vs {b:?}");
        }
    }

    /// Builds a graph exercising every op and reduces it to a scalar.
    fn graph(tape: &mut Tape<'_>, w: Var, x: Var) -> Var {
        let mv = tape.matvec(w, x); // 3
        let s = tape.sigmoid(mv);
        let t = tape.tanh(mv);
        let prod = tape.mul(s, t);
        let sm = tape.softmax(prod);
        let rows = tape.stack_rows(&[s, t, sm]); // 3x3
        let mm = tape.matmul_t(rows, w); // 3x3 (w is 3x3)
        let biased = tape.add_row_bias(mm, x);
        let r = tape.relu(biased);
        let u = tape.unfold(r, 2); // 2x6
        let mx = tape.max_rows(u); // 6
        let g = tape.gather(w, &[2, 0, 2]);
        let wsum = tape.row_weighted_sum(g, sm); // 3
        let row1 = tape.row(rows, 1);
        let sl = tape.slice(mx, 1, 3);
        let sum3 = tape.add(wsum, row1);
        let both = tape.concat(&[sum3, sl]); // 6
        let logits = tape.add(both, mx);
        let l1 = tape.sigmoid_bce(
            logits,
            vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
            vec![true, true, false, true, true, true],
        );
        let l2 = tape.sigmoid_bce(sum3, vec![0.0, 1.0, 0.0], vec![true; 3]);
        tape.sum(&[l1, l2])
    }

    #[test]
    fn every_op_matches_finite_differences() {
        let w0: Vec<f64> = (0..9)
            .map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.31 + 0.05 * i as f64)
            .collect();
        let x0 = vec![0.3, -0.7, 0.45];

        let eval = |w: &[f64], x: &[f64]| {
            let mut tape = Tape::new();
            let wv = tape.constant(Cow::Owned(w.to_vec()), 3, 3);
            let xv = tape.constant(Cow::Owned(x.to_vec()), 1, 3);
            let out = graph(&mut tape, wv, xv);
            tape.value(out)[0]
        };

        let mut tape = Tape::new();
        let wv = tape.param(&w0, 3, 3);
        let xv = tape.param(&x0, 1, 3);
        let out = graph(&mut tape, wv, xv);
        let grads = tape.backward(out);

        assert_close(grads.get(wv).unwrap(), &numeric(|w| eval(w, &x0), &w0));
        assert_close(grads.get(xv).unwrap(), &numeric(|x| eval(&w0, x), &x0));
    }

    #[test]
    fn constants_get_no_gradient() {
        let c = [1.0, 2.0];
        let p = [0.5, -0.5];
        let mut tape = Tape::new();
        let cv = tape.constant(Cow::Borrowed(&c), 1, 2);
        let pv = tape.param(&p, 1, 2);
        let prod = tape.mul(cv, pv);
        let out = tape.sigmoid_bce(prod, vec![1.0, 0.0], vec![true, true]);
        let grads = tape.backward(out);
        assert!(grads.get(cv).is_none());
        assert!(grads.get(pv).is_some());
    }

    #[test]
    fn masked_entries_contribute_exact_zero() {
        let z = [0.3, -1.2, 2.0];
        let mut tape = Tape::new();
        let zv = tape.param(&z, 1, 3);
        let out = tape.sigmoid_bce(zv, vec![1.0, 0.0, 1.0], vec![true, false, true]);
        let grads = tape.backward(out);
        assert_eq!(grads.get(zv).unwrap()[1].to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn bce_closed_form() {
        assert!((masked_bce(&[0.5], &[1.0], &[true]) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(masked_bce(&[0.5], &[1.0], &[false]), 0.0);
    }
}
