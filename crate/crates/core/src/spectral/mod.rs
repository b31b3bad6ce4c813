//! Fourier-domain diagnostics: DFT, projected non-uniform transforms,
//! relative spectral errors and Gaussian low/high label filtering.

mod filter;
mod fourier;
mod pca;
mod trace;

pub use filter::{
    distance_and_turning_epoch, e_low_e_high, pairwise_squared_distances, turning_point, FilteredDataset,
    GaussianFilter, TurningPoint,
};
pub use fourier::{
    delta_f, dft_1d, FourierBasis, frequency_grid, nonuniform_ft, nonuniform_ft_1d, project, select_peaks, DELTA_F_TOLERANCE,
};
pub use pca::{covariance, principal_direction, PrincipalDirection};
pub use trace::{filter_csv, FilterRecord, SpectrumTrace};
