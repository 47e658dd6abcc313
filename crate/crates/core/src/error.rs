use thiserror::Error;

use crate::homology::HomologyError;
use crate::knn::KnnError;
use crate::metrics::MetricsError;
use crate::pointcloud::PointCloudError;
use crate::spectral::SpectralError;
use crate::topo_filter::FilterError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Any failure raised while running the clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    PointCloud(#[from] PointCloudError),
    #[error(transparent)]
    Knn(#[from] KnnError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the input cloud collapses to a single location (zero spread
    /// or a zero neighbourhood radius).
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::Knn(KnnError::DegenerateScale(_))
                | Error::Spectral(SpectralError::DegenerateCloud)
        )
    }
}
