use super::gemm::{matmul, Mat};
use super::{Scalar, Tensor};

/// Square-kernel convolution geometry shared by the forward and transposed
/// variants. For a transposed convolution `in_ch`/`out_ch` still refer to its
/// own input and output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeom {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    /// Output side of a strided convolution over a `side`-pixel input.
    pub fn conv_out(&self, side: usize) -> usize {
        (side + 2 * self.pad - self.kernel) / self.stride + 1
    }

    /// Output side of a transposed convolution over a `side`-pixel input.
    pub fn conv_t_out(&self, side: usize) -> usize {
        ((side - 1) * self.stride + self.kernel).saturating_sub(2 * self.pad)
    }

    pub fn patch_len(&self, channels: usize) -> usize {
        self.kernel * self.kernel * channels
    }
}

/// Window geometry: `img` is the dense side, `grid` the strided side.
struct Windows {
    batch: usize,
    img_h: usize,
    img_w: usize,
    ch: usize,
    grid_h: usize,
    grid_w: usize,
    kernel: usize,
    stride: usize,
    pad: usize,
}

impl Windows {
    /// Calls `f(row, col_offset, img_offset)` for every in-bounds kernel tap;
    /// each tap covers `ch` contiguous channels.
    #[inline]
    fn for_each_tap(&self, mut f: impl FnMut(usize, usize, usize)) {
        let k = self.kernel;
        for b in 0..self.batch {
            for gy in 0..self.grid_h {
                for gx in 0..self.grid_w {
                    let row = (b * self.grid_h + gy) * self.grid_w + gx;
                    for ky in 0..k {
                        let iy = (gy * self.stride + ky) as isize - self.pad as isize;
                        if iy < 0 || iy >= self.img_h as isize {
                            continue;
                        }
                        for kx in 0..k {
                            let ix = (gx * self.stride + kx) as isize - self.pad as isize;
                            if ix < 0 || ix >= self.img_w as isize {
                                continue;
                            }
                            let col = (ky * k + kx) * self.ch;
                            let img = ((b * self.img_h + iy as usize) * self.img_w + ix as usize)
                                * self.ch;
                            f(row, col, img);
                        }
                    }
                }
            }
        }
    }

    fn cols_width(&self) -> usize {
        self.kernel * self.kernel * self.ch
    }

    fn im2col<T: Scalar>(&self, img: &[T]) -> Vec<T> {
        let width = self.cols_width();
        let mut cols = vec![T::zero(); self.batch * self.grid_h * self.grid_w * width];
        let ch = self.ch;
        self.for_each_tap(|row, col, src| {
            let dst = row * width + col;
            cols[dst..dst + ch].copy_from_slice(&img[src..src + ch]);
        });
        cols
    }

    fn col2im<T: Scalar>(&self, cols: &[T], img: &mut [T]) {
        let width = self.cols_width();
        let ch = self.ch;
        self.for_each_tap(|row, col, dst| {
            let src = row * width + col;
            for (d, s) in img[dst..dst + ch].iter_mut().zip(&cols[src..src + ch]) {
                *d += *s;
            }
        });
    }
}

fn add_bias<T: Scalar>(out: &mut [T], bias: &[T]) {
    for row in out.chunks_exact_mut(bias.len()) {
        for (o, b) in row.iter_mut().zip(bias) {
            *o += *b;
        }
    }
}

fn accumulate_bias_grad<T: Scalar>(dy: &[T], grad: &mut [T]) {
    for row in dy.chunks_exact(grad.len()) {
        for (g, d) in grad.iter_mut().zip(row) {
            *g += *d;
        }
    }
}

/// Strided convolution. Weight layout `[k, k, in, out]`.
pub(crate) fn conv_forward<T: Scalar>(
    geom: &ConvGeom,
    x: &Tensor<T>,
    weight: &[T],
    bias: Option<&[T]>,
) -> (Tensor<T>, Vec<T>) {
    let [b, h, w, c] = x.shape;
    assert_eq!(c, geom.in_ch, "conv input channels");
    let (oh, ow) = (geom.conv_out(h), geom.conv_out(w));
    let win = Windows {
        batch: b,
        img_h: h,
        img_w: w,
        ch: c,
        grid_h: oh,
        grid_w: ow,
        kernel: geom.kernel,
        stride: geom.stride,
        pad: geom.pad,
    };
    let cols = win.im2col(&x.data);
    let rows = b * oh * ow;
    let plen = geom.patch_len(c);
    let mut out = Tensor::zeros([b, oh, ow, geom.out_ch]);
    matmul(
        Mat::new(&cols, rows, plen),
        Mat::new(weight, plen, geom.out_ch),
        &mut out.data,
        false,
    );
    if let Some(bias) = bias {
        add_bias(&mut out.data, bias);
    }
    (out, cols)
}

pub(crate) fn conv_backward<T: Scalar>(
    geom: &ConvGeom,
    in_shape: [usize; 4],
    cols: &[T],
    weight: &[T],
    dy: &Tensor<T>,
    dweight: &mut [T],
    dbias: Option<&mut [T]>,
) -> Tensor<T> {
    let [b, h, w, c] = in_shape;
    let [_, oh, ow, o] = dy.shape;
    let rows = b * oh * ow;
    let plen = geom.patch_len(c);
    matmul(Mat::new(cols, rows, plen).t(), Mat::new(&dy.data, rows, o), dweight, true);
    if let Some(dbias) = dbias {
        accumulate_bias_grad(&dy.data, dbias);
    }
    let mut dcols = vec![T::zero(); rows * plen];
    matmul(Mat::new(&dy.data, rows, o), Mat::new(weight, plen, o).t(), &mut dcols, false);
    let win = Windows {
        batch: b,
        img_h: h,
        img_w: w,
        ch: c,
        grid_h: oh,
        grid_w: ow,
        kernel: geom.kernel,
        stride: geom.stride,
        pad: geom.pad,
    };
    let mut dx = Tensor::zeros(in_shape);
    win.col2im(&dcols, &mut dx.data);
    dx
}

/// Transposed convolution. Weight layout `[in, k, k, out]`.
pub(crate) fn conv_t_forward<T: Scalar>(
    geom: &ConvGeom,
    x: &Tensor<T>,
    weight: &[T],
    bias: Option<&[T]>,
) -> Tensor<T> {
    let [b, h, w, c] = x.shape;
    assert_eq!(c, geom.in_ch, "transposed conv input channels");
    let (oh, ow) = (geom.conv_t_out(h), geom.conv_t_out(w));
    let rows = b * h * w;
    let plen = geom.patch_len(geom.out_ch);
    let mut cols = vec![T::zero(); rows * plen];
    matmul(Mat::new(&x.data, rows, c), Mat::new(weight, c, plen), &mut cols, false);
    let win = Windows {
        batch: b,
        img_h: oh,
        img_w: ow,
        ch: geom.out_ch,
        grid_h: h,
        grid_w: w,
        kernel: geom.kernel,
        stride: geom.stride,
        pad: geom.pad,
    };
    let mut out = Tensor::zeros([b, oh, ow, geom.out_ch]);
    win.col2im(&cols, &mut out.data);
    if let Some(bias) = bias {
        add_bias(&mut out.data, bias);
    }
    out
}

pub(crate) fn conv_t_backward<T: Scalar>(
    geom: &ConvGeom,
    x: &Tensor<T>,
    weight: &[T],
    dy: &Tensor<T>,
    dweight: &mut [T],
    dbias: Option<&mut [T]>,
) -> Tensor<T> {
    let [b, h, w, c] = x.shape;
    let [_, oh, ow, o] = dy.shape;
    if let Some(dbias) = dbias {
        accumulate_bias_grad(&dy.data, dbias);
    }
    let win = Windows {
        batch: b,
        img_h: oh,
        img_w: ow,
        ch: o,
        grid_h: h,
        grid_w: w,
        kernel: geom.kernel,
        stride: geom.stride,
        pad: geom.pad,
    };
    let dcols = win.im2col(&dy.data);
    let rows = b * h * w;
    let plen = geom.patch_len(o);
    matmul(Mat::new(&x.data, rows, c).t(), Mat::new(&dcols, rows, plen), dweight, true);
    let mut dx = Tensor::zeros(x.shape);
    matmul(Mat::new(&dcols, rows, plen), Mat::new(weight, c, plen).t(), &mut dx.data, false);
    dx
}
