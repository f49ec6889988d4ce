"""Network-free part affinity field toolkit: synthesize fields, detect, associate, parse."""
from .associate import (
    ScoreMatrix,
    greedy_match,
    hungarian_match,
    line_integral_score,
    score_matrix,
)
from .detect import PartCandidate, detect_parts, nms_peaks, subpixel_refine
from .fields import (
    FieldStack,
    Scene,
    aggregate_confidence,
    aggregate_paf,
    confidence_map_person,
    paf_person,
    render_scene_fields,
    weighted_l2_loss,
)
from .parse import ParseConfig, PersonParse, exhaustive_parse, parse_poses, person_score
from .topology import SkeletonTopology, builtin, classify_edges, load_topology, validate_topology

__version__ = "0.1.0"
