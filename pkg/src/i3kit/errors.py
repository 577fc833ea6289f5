"""Exception hierarchy shared by all i3kit modules."""


class I3Error(Exception):
    """Base class for every error raised by i3kit."""


class EmptyFile(I3Error):
    pass


class MissingHeaderTag(I3Error):
    def __init__(self, tag):
        super().__init__(f"required header tag {tag!r} not found")
        self.tag = tag


class MalformedRow(I3Error):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateRecordId(I3Error):
    def __init__(self, record_id):
        super().__init__(f"duplicate record id {record_id!r}")
        self.record_id = record_id


class UnknownRecordId(I3Error):
    def __init__(self, record_id):
        super().__init__(f"citation link refers to unknown record {record_id!r}")
        self.record_id = record_id


class ZeroNRefs(I3Error):
    def __init__(self, link):
        super().__init__(f"citing paper has no references: {link!r}")
        self.link = link


class RecordNotInStratum(I3Error):
    pass


class OutOfRange(I3Error):
    def __init__(self, quantile):
        super().__init__(f"quantile {quantile} outside [0, 100.9]")
        self.quantile = quantile


class EmptyReference(I3Error):
    pass


class ZeroVariance(I3Error):
    pass


class UnparseableAddress(I3Error):
    def __init__(self, raw):
        super().__init__(f"cannot parse address {raw!r}")
        self.raw = raw


class NoAddress(I3Error):
    def __init__(self, record_id):
        super().__init__(f"record {record_id!r} has no usable address")
        self.record_id = record_id


class GazetteerMissing(I3Error):
    pass
