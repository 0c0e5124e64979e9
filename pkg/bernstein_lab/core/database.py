from sqlalchemy.ext.asyncio import AsyncEngine, create_async_engine, async_sessionmaker
from sqlalchemy.ext.asyncio import AsyncAttrs
from sqlalchemy.orm import DeclarativeBase

# Импортируем конфигурацию
from .config import Config


def database_url(db_name: str) -> str:
    # Пустое имя - база в памяти
    return f"sqlite+aiosqlite:///{db_name}" if db_name else "sqlite+aiosqlite://"


# Создание асинхронного движка SQLAlchemy
engine = create_async_engine(database_url(Config.DB_NAME), echo=False)  # Логи выключены

# Создание асинхронной фабрики сессий
async_session = async_sessionmaker(engine, expire_on_commit=False)


# Базовый класс для моделей
class Base(AsyncAttrs, DeclarativeBase):
    pass


# Создаем все таблицы, определенные в моделях
async def create_tables(target: AsyncEngine | None = None):
    from bernstein_lab.models.models import RunRecord, ReportRecord  # noqa: F401
    async with (target or engine).begin() as conn:
        await conn.run_sync(Base.metadata.create_all)
