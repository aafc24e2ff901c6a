import os

# 構成: project_root/src/paths.py, project_root/resources/
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
RESOURCES_DIR = os.path.join(PROJECT_ROOT, "resources")


def get_resource_path(relative_path):
    """
    resources フォルダ配下のファイルの絶対パスを取得する。

    Args:
        relative_path (str): resources フォルダからの相対パス (例: "config/presets.yml")

    Returns:
        str: リソースファイルの絶対パス
    """
    return os.path.abspath(os.path.join(RESOURCES_DIR, relative_path))
