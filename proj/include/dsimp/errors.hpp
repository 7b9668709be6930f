#pragma once

#include <stdexcept>
#include <string>

namespace dsimp {

/// Base class of everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define DSIMP_ERROR_TYPE(Name) \
    struct Name final : Error { \
        using Error::Error;     \
    }

// mesh construction and queries
DSIMP_ERROR_TYPE(DimensionMismatch);
DSIMP_ERROR_TYPE(DuplicateVertexInElement);
DSIMP_ERROR_TYPE(NonManifoldFace);
DSIMP_ERROR_TYPE(EmptyMesh);
DSIMP_ERROR_TYPE(IndexOutOfRange);
DSIMP_ERROR_TYPE(NonConformingMesh);

// refinement engine
DSIMP_ERROR_TYPE(NotALeaf);
DSIMP_ERROR_TYPE(VertexSetMismatch);
DSIMP_ERROR_TYPE(FaceNotInSimplex);
DSIMP_ERROR_TYPE(NonTermination);

// compatibility checks
DSIMP_ERROR_TYPE(NotNeighbors);
DSIMP_ERROR_TYPE(BoundaryFace);

// relabeling
DSIMP_ERROR_TYPE(PartitionIncomplete);

// metrics
DSIMP_ERROR_TYPE(DegenerateElement);

// file i/o
DSIMP_ERROR_TYPE(IoFailure);
DSIMP_ERROR_TYPE(ParseError);
DSIMP_ERROR_TYPE(UnsupportedVersion);
DSIMP_ERROR_TYPE(MalformedSection);
DSIMP_ERROR_TYPE(NoVolumeElements);
DSIMP_ERROR_TYPE(UnsupportedDimension);

#undef DSIMP_ERROR_TYPE

}  // namespace dsimp
