//! Synthetic targets, parity data and its exact transform, PGM images and MNIST IDX files.

mod dataset;
mod idx;
mod parity;
mod pgm;
mod synth;

pub use dataset::{hex, DatasetInfo, LabeledDataset};
pub use idx::{
    encode_idx_images, encode_idx_labels, idx_dataset, load_idx, parse_idx_images, parse_idx_labels, IdxImages,
    IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC, NUM_CLASSES,
};
pub use parity::{parity_corner, parity_dataset, parity_exact_ft, ParitySpec, MAX_PARITY_DIM};
pub use pgm::{encode_pgm, load_pgm, parse_pgm, GrayImage, ImageDataset};
pub use synth::{synth_1d, SynthSpec};
