use ndarray::NdFloat;
use num_traits::FromPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the numeric modules are generic over.
pub trait Scalar: NdFloat + FromPrimitive + Default + Serialize + DeserializeOwned {
    /// Bit pattern used to key states by exact value.
    fn key_bits(self) -> u64;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("representable literal")
    }
}

impl Scalar for f64 {
    fn key_bits(self) -> u64 {
        // +0.0 and -0.0 are the same state
        if self == 0.0 {
            0
        } else {
            self.to_bits()
        }
    }
}

impl Scalar for f32 {
    fn key_bits(self) -> u64 {
        if self == 0.0 {
            0
        } else {
            u64::from(self.to_bits())
        }
    }
}
