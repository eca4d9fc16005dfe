"""Exception hierarchy shared by every module.

Each error's class name doubles as the machine-readable error name that the
command line prints on failure.
"""


class Mocap2dError(Exception):
    """Base class for all domain errors."""

    @property
    def name(self):
        return type(self).__name__


# -- BVH -------------------------------------------------------------------

class BvhError(Mocap2dError, ValueError):
    pass


class MalformedHierarchy(BvhError):
    pass


class ChannelCountMismatch(BvhError):
    pass


class FrameCountMismatch(ChannelCountMismatch):
    pass


class MissingMotionSection(BvhError):
    pass


class MalformedMotion(BvhError):
    pass


class DuplicateJointName(BvhError):
    pass


class FrameOutOfRange(Mocap2dError, IndexError):
    pass


class InvalidFps(Mocap2dError, ValueError):
    pass


# -- PCA / planes ----------------------------------------------------------

class EmptyInput(Mocap2dError, ValueError):
    pass


class NotSymmetric(Mocap2dError, ValueError):
    pass


class NoFrames(Mocap2dError, ValueError):
    pass


# -- rig -------------------------------------------------------------------

class UnknownBoneInPose(Mocap2dError, KeyError):
    pass


class UnknownAttachment(Mocap2dError, KeyError):
    pass


class UnknownSkin(Mocap2dError, KeyError):
    pass


class InvalidRig(Mocap2dError, ValueError):
    """Raised when an operation requires a valid rig; carries the report."""

    def __init__(self, report):
        self.report = list(report)
        lines = "; ".join(f"{i.code} at {i.path}" for i in self.report[:5])
        super().__init__(f"rig has {len(self.report)} problem(s): {lines}")


# -- retarget --------------------------------------------------------------

class DegenerateBone(Mocap2dError, ValueError):
    pass


class UnmappedJoint(Mocap2dError, KeyError):
    pass


class SkeletonMismatch(Mocap2dError, ValueError):
    pass


class EmptyMotion(Mocap2dError, ValueError):
    pass


# -- interchange -----------------------------------------------------------

class SchemaViolation(Mocap2dError, ValueError):
    def __init__(self, path, message, report=None):
        self.path = path
        self.report = list(report or [])
        super().__init__(f"{path}: {message}")


class InvalidReference(SchemaViolation):
    pass


class UnsupportedFeature(Mocap2dError, ValueError):
    def __init__(self, construct, path=None):
        self.construct = construct
        self.path = path if path is not None else f"/{construct}"
        super().__init__(f"unsupported construct {construct!r} at {self.path}")


class MissingImage(Mocap2dError, FileNotFoundError):
    pass


class DuplicateLabel(Mocap2dError, ValueError):
    pass


# -- library ---------------------------------------------------------------

class MissingTagsFile(Mocap2dError, FileNotFoundError):
    pass


class EmptyLibrary(Mocap2dError, ValueError):
    def __init__(self, message, warnings=()):
        self.warnings = list(warnings)
        super().__init__(message)


# -- render ----------------------------------------------------------------

class MissingTexture(Mocap2dError, KeyError):
    pass
