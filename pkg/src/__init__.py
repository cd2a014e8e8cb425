TOOL_NAME = 'data-readiness-report'
__version__ = '1.0.0'
