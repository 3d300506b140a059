use crate::error::{Error, Result};
use crate::numerics::Tensor4;

/// Standard cross-correlation with zero padding, stride 1.
/// input: [batch, c, h, w], kernels: [oc, c, k, k] -> [batch, oc, oh, ow]
/// where oh = h + 2*padding - k + 1.
pub fn conv2d_forward(input: &Tensor4, kernels: &Tensor4, padding: usize) -> Result<Tensor4> {
    let [batch, c, h, w] = input.dims();
    let [oc, kc, kh, kw] = kernels.dims();
    if kc != c {
        return Err(Error::Shape(format!(
            "conv2d: input has {c} channels, kernels expect {kc}"
        )));
    }
    let oh = (h + 2 * padding).checked_sub(kh - 1).ok_or_else(|| {
        Error::Shape(format!("conv2d: kernel {kh}x{kw} larger than padded input"))
    })?;
    let ow = (w + 2 * padding).checked_sub(kw - 1).ok_or_else(|| {
        Error::Shape(format!("conv2d: kernel {kh}x{kw} larger than padded input"))
    })?;
    let mut out = Tensor4::zeros([batch, oc, oh, ow]);
    for b in 0..batch {
        for o in 0..oc {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = 0.0;
                    for ic in 0..c {
                        for ky in 0..kh {
                            let iy = oy + ky;
                            if iy < padding || iy >= h + padding {
                                continue;
                            }
                            for kx in 0..kw {
                                let ix = ox + kx;
                                if ix < padding || ix >= w + padding {
                                    continue;
                                }
                                acc += input.get(b, ic, iy - padding, ix - padding)
                                    * kernels.get(o, ic, ky, kx);
                            }
                        }
                    }
                    out.set(b, o, oy, ox, acc);
                }
            }
        }
    }
    Ok(out)
}

/// Gradient of the loss w.r.t. the kernels: dK[o,ic,ky,kx] accumulated from
/// d_out [batch, oc, oh, ow] and the forward input.
pub fn conv2d_backward_kernel(
    input: &Tensor4,
    d_out: &Tensor4,
    kernel_dims: [usize; 4],
    padding: usize,
) -> Result<Tensor4> {
    let [batch, c, h, w] = input.dims();
    let [ob, oc, oh, ow] = d_out.dims();
    let [koc, kc, kh, kw] = kernel_dims;
    if ob != batch || koc != oc || kc != c {
        return Err(Error::Shape("conv2d_backward_kernel: dims disagree".into()));
    }
    let mut dk = Tensor4::zeros(kernel_dims);
    for b in 0..batch {
        for o in 0..oc {
            for oy in 0..oh {
                for ox in 0..ow {
                    let g = d_out.get(b, o, oy, ox);
                    if g == 0.0 {
                        continue;
                    }
                    for ic in 0..c {
                        for ky in 0..kh {
                            let iy = oy + ky;
                            if iy < padding || iy >= h + padding {
                                continue;
                            }
                            for kx in 0..kw {
                                let ix = ox + kx;
                                if ix < padding || ix >= w + padding {
                                    continue;
                                }
                                let idx = dk.idx(o, ic, ky, kx);
                                dk.data_mut()[idx] +=
                                    g * input.get(b, ic, iy - padding, ix - padding);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(dk)
}

/// Gradient of the loss w.r.t. the conv input.
pub fn conv2d_backward_input(
    d_out: &Tensor4,
    kernels: &Tensor4,
    input_dims: [usize; 4],
    padding: usize,
) -> Result<Tensor4> {
    let [batch, c, h, w] = input_dims;
    let [ob, oc, oh, ow] = d_out.dims();
    let [koc, kc, kh, kw] = kernels.dims();
    if ob != batch || koc != oc || kc != c {
        return Err(Error::Shape("conv2d_backward_input: dims disagree".into()));
    }
    let mut dx = Tensor4::zeros(input_dims);
    for b in 0..batch {
        for o in 0..oc {
            for oy in 0..oh {
                for ox in 0..ow {
                    let g = d_out.get(b, o, oy, ox);
                    if g == 0.0 {
                        continue;
                    }
                    for ic in 0..c {
                        for ky in 0..kh {
                            let iy = oy + ky;
                            if iy < padding || iy >= h + padding {
                                continue;
                            }
                            for kx in 0..kw {
                                let ix = ox + kx;
                                if ix < padding || ix >= w + padding {
                                    continue;
                                }
                                let idx = dx.idx(b, ic, iy - padding, ix - padding);
                                dx.data_mut()[idx] += g * kernels.get(o, ic, ky, kx);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(dx)
}
