from typing import List

from langroid.agent.tool_message import ToolMessage


class SegmentExtractTool(ToolMessage):
    request: str = "extract_segments"
    purpose: str = "To extract segments from a body of text containing numbered segments."
    segment_list: List[int]

    @classmethod
    def instructions(cls) -> str:
        return
        """
        Use this tool/function to indicate certain segments from a body of text containing numbered segments.
        """
