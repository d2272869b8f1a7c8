"""Texture similarity through geodesic distances on wavelet statistical manifolds.

The package fits gamma and Weibull models to the magnitudes of dual-tree
complex wavelet subbands, measures divergences and geodesic distances
between the fitted models, approximates geodesics with shortest paths on
similarity graphs, and scores retrieval quality on labelled datasets.
"""

from .distributions import (ConvergenceError, DegenerateSample, GammaParams,
                            Sample, WeibullParams, gamma_mle, gamma_sample,
                            weibull_mle, weibull_sample)
from .divergences import QuadratureFailure, kld, kld_numeric, skld
from .features import (GrayImage, Signature, SubbandSet, dtcwt_forward,
                       extract_signature, load_image)
from .geometry import (Family, GeodesicResult, NoConvergence, ParamPath,
                       fisher_matrix, gd_skld, geodesic_distance_bvp,
                       geodesic_shoot, line_element, make_params, path_length)
from .graph import (DistanceMatrix, EdgeWeight, NegativeCycle,
                    ShortestPathResult, build_distance_matrix, floyd_warshall,
                    insert_query, load_matrix_binary, load_matrix_csv,
                    reconstruct_path, save_matrix_binary, save_matrix_csv,
                    validate_metricity)
from .retrieval import (Aggregation, DatasetIndex, DatasetItem, DBConfig,
                        Layout, Measure, Method, PRCurve, RetrievalReport,
                        SignatureDB, evaluate, ingest_dataset, load_db,
                        precision_recall, save_db, signature_distance)

__version__ = "0.1.0"
