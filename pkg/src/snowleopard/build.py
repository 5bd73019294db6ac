"""Build selection: fetch a build by id and install it before a suite run."""

from __future__ import annotations

import abc
import shutil
from pathlib import Path

__all__ = [
    "BuildError",
    "BuildInstaller",
    "LocalBuildInstaller",
    "NoopInstaller",
    "install_build",
]


class BuildError(RuntimeError):
    pass


class BuildInstaller(abc.ABC):
    @abc.abstractmethod
    def fetch(self, build_id: str) -> Path:
        """Make the build artifact available locally and return its path."""

    @abc.abstractmethod
    def install(self, path: Path) -> None: ...


class NoopInstaller(BuildInstaller):
    def fetch(self, build_id: str) -> Path:
        return Path(build_id)

    def install(self, path: Path) -> None:
        pass


class LocalBuildInstaller(BuildInstaller):
    """Builds are files or directories named by build id under ``source_dir``.

    Installing copies the artifact into ``install_dir``.
    """

    def __init__(self, source_dir: str | Path, install_dir: str | Path):
        self.source_dir = Path(source_dir)
        self.install_dir = Path(install_dir)
        self._fetched: set[Path] = set()

    def fetch(self, build_id: str) -> Path:
        path = self.source_dir / build_id
        if not build_id or path.parent != self.source_dir or not path.exists():
            raise BuildError(f"unknown build {build_id!r} in {self.source_dir}")
        self._fetched.add(path)
        return path

    def install(self, path: Path) -> None:
        path = Path(path)
        if path not in self._fetched:
            raise BuildError(f"{path} was not fetched")
        dest = self.install_dir / path.name
        self.install_dir.mkdir(parents=True, exist_ok=True)
        if dest.exists():
            if dest.is_dir():
                shutil.rmtree(dest)
            else:
                dest.unlink()
        if path.is_dir():
            shutil.copytree(path, dest)
        else:
            shutil.copy2(path, dest)


def install_build(installer: BuildInstaller, build_id: str) -> Path:
    path = installer.fetch(build_id)
    installer.install(path)
    return path
