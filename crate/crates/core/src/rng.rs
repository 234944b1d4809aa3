// Copyright 2026 The fragshadow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Explicitly seeded, splittable random streams.
//!
//! Every random draw in the crate goes through a [`SeedStream`]. A stream is a
//! 64-bit seed; child streams are derived by mixing labels into the parent
//! seed, so independent consumers (fragments, trials, gates) never share a
//! generator and results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator type used for all sampling.
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedStream(u64);

impl SeedStream {
    pub const fn new(seed: u64) -> Self {
        SeedStream(seed)
    }

    pub const fn seed(self) -> u64 {
        self.0
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(self) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Child stream for `label`. Distinct labels give unrelated streams.
    pub fn child(self, label: u64) -> Self {
        SeedStream(splitmix64(self.0 ^ splitmix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }

    /// Child stream reached by following a path of labels.
    pub fn derive(self, path: &[u64]) -> Self {
        path.iter().fold(self, |s, &l| s.child(l))
    }
}

impl From<u64> for SeedStream {
    fn from(seed: u64) -> Self {
        SeedStream(seed)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
