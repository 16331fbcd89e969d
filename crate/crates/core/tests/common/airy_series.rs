//! `Ai(-z)` from its Maclaurin series in double-double arithmetic, with
//! bisection for the zeros. Shares nothing with the library's ODE marcher.

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let v = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(v.hi, v.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let r = self.add(Dd { hi: -p, lo: -e });
        let q2 = r.hi / d;
        quick_two_sum(q1, q2)
    }
}

// Ai(0) and -Ai'(0) to double-double precision.
const C1: Dd = Dd {
    hi: 0.3550280538878172,
    lo: 2.05233632436212e-17,
};
const C2: Dd = Dd {
    hi: 0.2588194037928068,
    lo: -2.522243111610832e-17,
};

/// `Ai(-z)` for `0 ≤ z ≲ 15`, accurate to well below 1e-12 absolute.
pub fn airy_ai_neg(z: f64) -> f64 {
    let x = Dd::from(-z);
    let x3 = x.mul(x).mul(x);
    // f = Σ a_k, a_{k+1} = a_k x³ / ((3k+2)(3k+3))
    // g = Σ b_k, b_{k+1} = b_k x³ / ((3k+3)(3k+4))
    let mut a = Dd::from(1.0);
    let mut b = x;
    let mut f = a;
    let mut g = b;
    for k in 0..200 {
        let kf = k as f64;
        a = a.mul(x3).div_f64((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        b = b.mul(x3).div_f64((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        f = f.add(a);
        g = g.add(b);
        if a.hi.abs() < 1e-40 && b.hi.abs() < 1e-40 {
            break;
        }
    }
    let ai = C1.mul(f).add(C2.mul(g).neg());
    ai.hi + ai.lo
}

/// The n-th positive zero of `Ai(-z)` by scanning and bisection.
pub fn airy_zero_oracle(n: u32) -> f64 {
    let step = 0.05;
    let mut found = 0;
    let mut z = 0.0;
    let mut f = airy_ai_neg(z);
    loop {
        let z1 = z + step;
        let f1 = airy_ai_neg(z1);
        if f.signum() != f1.signum() {
            found += 1;
            if found == n {
                let (mut lo, mut hi, flo) = (z, z1, f);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let fm = airy_ai_neg(mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        z = z1;
        f = f1;
        assert!(z < 20.0, "zero {n} not found below 20");
    }
}
